//! Subcommand drivers. Each `render_*` function is pure: it returns the
//! file contents, which [`run`] then writes.

use std::path::PathBuf;

use gaussgeo::liouvillian::gap_report;
use gaussgeo::models::{boundary_xy_report, xy_dispersion, xy_qgt_finite, XYParams};
use gaussgeo::momentum::gap_on_circle;
use gaussgeo::numerics::fit_power_law;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::args::{Cli, Command};
use crate::error::{CliError, Result};
use crate::models::{boundary_params, evaluate, symbol_model, Cell, Model, Quantity};
use crate::oracle::{run_oracle_suite, CheckResult};
use crate::output::{emit, fmt_cell, fmt_f64, fmt_param, json_cell, json_f64, json_string, Csv};
use crate::spec::{Format, OracleSpec, PointSpec, ScalingSpec, SweepSpec};
use crate::VERSION;

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::bad(format!("cannot start {} workers: {e}", jobs.unwrap_or(0))))
}

fn header(point: &PointSpec, skip: &[usize], quantities: &[Quantity]) -> Vec<String> {
    let fixed: Vec<String> =
        point.fixed(skip).iter().map(|(k, v, int)| format!("{k}={}", fmt_param(*v, *int))).collect();
    let mut out = vec![format!("gaussgeo {VERSION}"), format!("model: {}", point.model.name()), format!("fixed: {}", fixed.join(" "))];
    if quantities.contains(&Quantity::Muc) {
        if let Some((a, b)) = point.options.pair {
            let l = point.model.tangent_labels();
            out.push(format!("muc: {},{} {:?}", l[a], l[b], point.options.muc_mode).to_lowercase());
        }
    }
    out.push(format!("seed: {}", point.seed));
    out
}

fn fixed_json(point: &PointSpec, skip: &[usize]) -> Value {
    let map: Map<String, Value> = point
        .fixed(skip)
        .into_iter()
        .map(|(k, v, int)| (k.to_string(), if int { json!(v as u64) } else { json_f64(v) }))
        .collect();
    Value::Object(map)
}

fn quantity_names(qs: &[Quantity]) -> Vec<&'static str> {
    qs.iter().map(|q| q.name()).collect()
}

pub fn sweep_cells(spec: &SweepSpec) -> Result<Vec<(Vec<f64>, Vec<Cell>)>> {
    let points = spec.points();
    let model = spec.point.model;
    let cells: Vec<Vec<Cell>> = pool(spec.jobs)?
        .install(|| points.par_iter().map(|p| evaluate(model, p, &spec.quantities, &spec.point.options)).collect());
    Ok(points.into_iter().zip(cells).collect())
}

pub fn render_sweep(spec: &SweepSpec) -> Result<String> {
    let rows = sweep_cells(spec)?;
    let params = spec.point.model.params();
    let skip: Vec<usize> = spec.axes.iter().map(|a| a.index).collect();
    Ok(match spec.point.format {
        Format::Csv => Csv {
            comments: header(&spec.point, &skip, &spec.quantities),
            header: spec.axes.iter().map(|a| a.name.clone()).chain(quantity_names(&spec.quantities).into_iter().map(String::from)).collect(),
            rows: rows
                .iter()
                .map(|(p, cells)| {
                    skip.iter().map(|&i| fmt_param(p[i], params[i].integer)).chain(cells.iter().map(fmt_cell)).collect()
                })
                .collect(),
        }
        .render(),
        Format::Json => json_string(&json!({
            "version": VERSION,
            "model": spec.point.model.name(),
            "seed": spec.point.seed,
            "fixed": fixed_json(&spec.point, &skip),
            "axes": spec.axes.iter().map(|a| a.name.clone()).collect::<Vec<_>>(),
            "quantities": quantity_names(&spec.quantities),
            "rows": rows.iter().map(|(p, cells)| {
                let axes: Vec<Value> = skip.iter().map(|&i| if params[i].integer { json!(p[i] as u64) } else { json_f64(p[i]) }).collect();
                json!({"point": axes, "values": cells.iter().map(json_cell).collect::<Vec<_>>()})
            }).collect::<Vec<_>>(),
        })),
    })
}

/// Raw CSV and JSON fit report of a scaling study.
pub fn render_scaling(spec: &ScalingSpec) -> Result<(String, String)> {
    let model = spec.point.model;
    let n_index = model.size_index().expect("validated by ScalingSpec");
    let cells: Vec<Vec<Cell>> = pool(spec.jobs)?.install(|| {
        spec.sizes
            .par_iter()
            .map(|&n| {
                let mut v = spec.point.values.clone();
                v[n_index] = n as f64;
                evaluate(model, &v, &spec.quantities, &spec.point.options)
            })
            .collect()
    });
    let csv = Csv {
        comments: header(&spec.point, &[n_index], &spec.quantities),
        header: std::iter::once("n".to_string()).chain(quantity_names(&spec.quantities).into_iter().map(String::from)).collect(),
        rows: spec.sizes.iter().zip(&cells).map(|(n, c)| std::iter::once(n.to_string()).chain(c.iter().map(fmt_cell)).collect()).collect(),
    }
    .render();
    let mut fits = Map::new();
    for (qi, q) in spec.quantities.iter().enumerate() {
        let samples: Vec<Value> = spec.sizes.iter().zip(&cells).map(|(n, c)| json!([n, json_cell(&c[qi])])).collect();
        let window: Vec<(usize, f64)> = spec
            .sizes
            .iter()
            .zip(&cells)
            .filter(|(n, _)| **n >= spec.window.0 && **n <= spec.window.1)
            .filter_map(|(n, c)| c[qi].ok().map(|v| (*n, v.abs())))
            .collect();
        let entry = match fit_power_law(&window) {
            Ok(f) => json!({
                "exponent": json_f64(f.exponent),
                "prefactor": json_f64(f.prefactor),
                "r_squared": json_f64(f.r_squared),
                "n_min": f.n_range.0,
                "n_max": f.n_range.1,
                "samples": samples,
            }),
            Err(e) => json!({"error": e.name(), "samples": samples}),
        };
        fits.insert(q.name().to_string(), entry);
    }
    let report = json_string(&json!({
        "version": VERSION,
        "model": model.name(),
        "seed": spec.point.seed,
        "fixed": fixed_json(&spec.point, &[n_index]),
        "sizes": spec.sizes,
        "window": [spec.window.0, spec.window.1],
        "fits": Value::Object(fits),
    }));
    Ok((csv, report))
}

pub fn render_geometry(point: &PointSpec) -> Result<String> {
    let (geo, purity) = match point.model {
        Model::BoundaryXy => {
            let r = boundary_xy_report(&boundary_params(&point.values)?)?;
            let purity = gaussgeo::gaussian::purity(&r.gamma)?;
            (r.geometry, Some(purity))
        }
        Model::Xy => {
            let v = &point.values;
            (xy_qgt_finite(&XYParams::new(v[0], v[1], v[2], v[3] as usize)?)?, Some(1.0))
        }
        m => return Err(CliError::bad(format!("geometry is available for boundary-xy and xy, not {}", m.name()))),
    };
    let labels = point.model.tangent_labels();
    let r_cell: Cell = geo.r_ratio.ok_or("SingularFisher");
    Ok(match point.format {
        Format::Csv => {
            let mut rows = Vec::new();
            for (name, m) in [("g", &geo.g), ("u", &geo.u)] {
                for a in 0..labels.len() {
                    for b in 0..labels.len() {
                        rows.push(vec![name.to_string(), labels[a].to_string(), labels[b].to_string(), fmt_f64(m[(a, b)])]);
                    }
                }
            }
            rows.push(vec!["R".into(), String::new(), String::new(), fmt_cell(&r_cell)]);
            if let Some(p) = purity {
                rows.push(vec!["purity".into(), String::new(), String::new(), fmt_f64(p)]);
            }
            Csv { comments: header(point, &[], &[]), header: vec!["quantity".into(), "mu".into(), "nu".into(), "value".into()], rows }
                .render()
        }
        Format::Json => {
            let mat = |m: &gaussgeo::RMat| -> Vec<Vec<Value>> {
                (0..m.nrows()).map(|a| (0..m.ncols()).map(|b| json_f64(m[(a, b)])).collect()).collect()
            };
            json_string(&json!({
                "version": VERSION,
                "model": point.model.name(),
                "seed": point.seed,
                "fixed": fixed_json(point, &[]),
                "labels": labels,
                "g": mat(&geo.g),
                "u": mat(&geo.u),
                "R": json_cell(&r_cell),
                "purity": purity.map(json_f64),
            }))
        }
    })
}

pub fn render_spectrum(point: &PointSpec) -> Result<String> {
    let v = &point.values;
    let comments = header(point, &[], &[]);
    match point.model {
        Model::BoundaryXy => {
            let model = gaussgeo::models::build_boundary_driven_xy(&boundary_params(v)?)?;
            let r = gap_report(&gaussgeo::liouvillian::shape_matrices(&model)?.x)?;
            Ok(match point.format {
                Format::Csv => {
                    let mut comments = comments;
                    comments.push(format!(
                        "gap: {} gap_xhat: {} gap_liouville: {} condition: {}{}",
                        fmt_f64(r.delta),
                        fmt_f64(r.delta_xhat),
                        fmt_f64(r.delta_liouville),
                        fmt_f64(r.condition),
                        if r.near_defective { " near-defective" } else { "" }
                    ));
                    let rows = r.spectrum.iter().map(|z| vec![fmt_f64(z.re), fmt_f64(z.im)]).collect();
                    Csv { comments, header: vec!["re".into(), "im".into()], rows }.render()
                }
                Format::Json => json_string(&json!({
                    "version": VERSION,
                    "model": point.model.name(),
                    "seed": point.seed,
                    "fixed": fixed_json(point, &[]),
                    "gap": json_f64(r.delta),
                    "gap_xhat": json_f64(r.delta_xhat),
                    "gap_liouville": json_f64(r.delta_liouville),
                    "condition": json_f64(r.condition),
                    "near_defective": r.near_defective,
                    "spectrum": r.spectrum.iter().map(|z| json!([json_f64(z.re), json_f64(z.im)])).collect::<Vec<_>>(),
                })),
            })
        }
        Model::RotatedXy | Model::Reservoir => {
            let gap = gap_on_circle(&symbol_model(point.model, v)?);
            Ok(match point.format {
                Format::Csv => Csv { comments, header: vec!["gap".into()], rows: vec![vec![fmt_f64(gap)]] }.render(),
                Format::Json => json_string(&json!({
                    "version": VERSION,
                    "model": point.model.name(),
                    "seed": point.seed,
                    "fixed": fixed_json(point, &[]),
                    "gap": json_f64(gap),
                })),
            })
        }
        Model::Xy => {
            let p = XYParams::new(v[0], v[1], v[2], v[3] as usize)?;
            let eps = (0..p.n).map(|k| xy_dispersion(&p, k).map(|d| d.0)).collect::<gaussgeo::Result<Vec<_>>>()?;
            Ok(match point.format {
                Format::Csv => Csv {
                    comments,
                    header: vec!["k".into(), "epsilon".into()],
                    rows: eps.iter().enumerate().map(|(k, e)| vec![k.to_string(), fmt_f64(*e)]).collect(),
                }
                .render(),
                Format::Json => json_string(&json!({
                    "version": VERSION,
                    "model": point.model.name(),
                    "seed": point.seed,
                    "fixed": fixed_json(point, &[]),
                    "epsilon": eps.iter().map(|e| json_f64(*e)).collect::<Vec<_>>(),
                })),
            })
        }
        m => Err(CliError::bad(format!("no spectrum for {}", m.name()))),
    }
}

pub fn oracle_results(spec: &OracleSpec) -> Result<Vec<CheckResult>> {
    Ok(pool(spec.jobs)?.install(|| run_oracle_suite(spec.seed, spec.cases, spec.flip)))
}

pub fn render_oracle(spec: &OracleSpec, results: &[CheckResult]) -> String {
    let status = |r: &CheckResult| if r.passed() { "pass" } else { r.error.unwrap_or("fail") };
    let failed = results.iter().filter(|r| !r.passed()).count();
    match spec.format {
        Format::Csv => Csv {
            comments: vec![format!("gaussgeo {VERSION}"), format!("seed: {} cases: {}", spec.seed, spec.cases)],
            header: ["suite", "case", "seed", "deviation", "tolerance", "status"].map(String::from).to_vec(),
            rows: results
                .iter()
                .map(|r| {
                    vec![
                        r.suite.to_string(),
                        r.case.to_string(),
                        r.seed.to_string(),
                        fmt_f64(r.deviation),
                        fmt_f64(r.tolerance),
                        status(r).to_string(),
                    ]
                })
                .collect(),
        }
        .render(),
        Format::Json => json_string(&json!({
            "version": VERSION,
            "seed": spec.seed,
            "cases": spec.cases,
            "passed": failed == 0,
            "failed": failed,
            "checks": results.iter().map(|r| json!({
                "suite": r.suite,
                "case": r.case,
                "seed": r.seed,
                "deviation": json_f64(r.deviation),
                "tolerance": json_f64(r.tolerance),
                "status": status(r),
            })).collect::<Vec<_>>(),
        })),
    }
}

/// Scaling output paths: the requested format goes to `out`, the other
/// one next to it.
fn scaling_paths(out: &std::path::Path, format: Format) -> (PathBuf, PathBuf) {
    let other_ext = match format {
        Format::Csv => "json",
        Format::Json => "csv",
    };
    let mut other = out.with_extension(other_ext);
    if other == out {
        other = out.with_extension(format!("{other_ext}.{other_ext}"));
    }
    (out.to_path_buf(), other)
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut settings = cli.command.flags().settings(cli.command.section())?;
    match &cli.command {
        Command::Sweep(_) => {
            let spec = SweepSpec::from_settings(&settings)?;
            emit(spec.point.out.as_deref(), &render_sweep(&spec)?)
        }
        Command::Scaling(_) => {
            if settings.get("format").is_none() {
                settings.set("format", "json");
            }
            let spec = ScalingSpec::from_settings(&settings)?;
            let (csv, report) = render_scaling(&spec)?;
            let (primary, secondary) = match spec.point.format {
                Format::Csv => (csv, report),
                Format::Json => (report, csv),
            };
            match &spec.point.out {
                None => emit(None, &primary),
                Some(out) => {
                    let (a, b) = scaling_paths(out, spec.point.format);
                    emit(Some(&a), &primary)?;
                    emit(Some(&b), &secondary)
                }
            }
        }
        Command::Geometry(_) => {
            let point = PointSpec::from_settings(&settings)?;
            emit(point.out.as_deref(), &render_geometry(&point)?)
        }
        Command::Spectrum(_) => {
            let point = PointSpec::from_settings(&settings)?;
            emit(point.out.as_deref(), &render_spectrum(&point)?)
        }
        Command::Oracle(_) => {
            let spec = OracleSpec::from_settings(&settings)?;
            let results = oracle_results(&spec)?;
            emit(spec.out.as_deref(), &render_oracle(&spec, &results))?;
            let failed = results.iter().filter(|r| !r.passed()).count();
            eprintln!("oracle: {} checks, {failed} failed", results.len());
            if failed > 0 {
                return Err(CliError::OracleFailure { failed, total: results.len() });
            }
            Ok(())
        }
    }
}
