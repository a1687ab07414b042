//! Output writers (run log CSV, per-iteration indicator CSV, legacy
//! ASCII VTK, plain-text mesh format), least-squares rate fitting, and
//! the driver behind the command-line interface.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! every file re-parses to bit-identical values and identical runs
//! produce byte-identical output.

use crate::adapt::{adaptive_loop_with, AdaptConfig, AdaptError, IterationState, RunLog};
use crate::cases::TestCase;
use crate::estimator::EstimatorKind;
use crate::geometry::{polygon_quadrature, Point2};
use crate::mesh::Mesh;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Adapt(#[from] AdaptError),
    #[error("unknown test case {0:?}")]
    UnknownCase(String),
    #[error("unknown estimator {0:?}")]
    UnknownEstimator(String),
    #[error("need at least two data points after burn-in to fit a rate")]
    InsufficientData,
    #[error("parse error in {file}: {message}")]
    Parse { file: String, message: String },
}

/// Command-line configuration; field defaults match the CLI defaults.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub case: String,
    pub order: usize,
    pub estimator: String,
    pub theta: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub max_dofs: usize,
    pub grid_n: usize,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            case: "1".into(),
            order: 1,
            estimator: "heur".into(),
            theta: 0.5,
            tol: 1e-2,
            max_iters: 30,
            max_dofs: 200_000,
            grid_n: 4,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub iterations: usize,
    pub final_dofs: usize,
    pub final_cells: usize,
    pub final_error: f64,
    pub final_estimate: f64,
    pub rate: Option<f64>,
}

/// Executes a full adaptive run and writes `run.csv`,
/// `indicators_<iter>.csv`, `mesh_<iter>.vtk` and `summary.txt` into
/// the output directory.
pub fn run(config: &CliConfig) -> Result<RunSummary, IoError> {
    let case = TestCase::by_name(&config.case)
        .ok_or_else(|| IoError::UnknownCase(config.case.clone()))?;
    let kind = EstimatorKind::parse(&config.estimator)
        .ok_or_else(|| IoError::UnknownEstimator(config.estimator.clone()))?;
    let adapt_config = AdaptConfig {
        order: config.order,
        kind,
        theta: config.theta,
        error_tol: config.tol,
        max_iters: config.max_iters,
        max_dofs: config.max_dofs,
        grid_n: config.grid_n,
        ..AdaptConfig::default()
    };
    fs::create_dir_all(&config.out_dir)?;

    let mut deferred: Option<IoError> = None;
    let log = adaptive_loop_with(&adapt_config, &case, |state| {
        if deferred.is_none() {
            if let Err(e) = write_iteration_outputs(&config.out_dir, state) {
                deferred = Some(e);
            }
        }
    })?;
    if let Some(e) = deferred {
        return Err(e);
    }

    write_run_csv(&config.out_dir.join("run.csv"), &log)?;
    let points: Vec<(f64, f64)> =
        log.rows.iter().map(|r| (r.n_dofs as f64, r.error)).collect();
    let rate = fit_rate(&points, 3).ok();
    let last = log.final_record().expect("a run always logs at least one row");
    let summary = RunSummary {
        iterations: log.rows.len(),
        final_dofs: last.n_dofs,
        final_cells: last.n_cells,
        final_error: last.error,
        final_estimate: last.estimate,
        rate,
    };
    write_summary(&config.out_dir.join("summary.txt"), config, &summary)?;
    Ok(summary)
}

fn write_iteration_outputs(dir: &Path, state: &IterationState) -> Result<(), IoError> {
    write_indicators_csv(
        &dir.join(format!("indicators_{}.csv", state.iter)),
        state,
    )?;
    // Cell data: projected solution average, cell indicator, marked flag.
    let nc = state.mesh.num_cells();
    let mut u_avg = Vec::with_capacity(nc);
    for ci in 0..nc {
        let poly = &state.mesh.cell(ci).polygon;
        let quad = polygon_quadrature(poly, 2).map_err(AdaptError::from)?;
        let coeffs = &state.projection.cells[ci].value;
        let mono = &state.elements[ci].monomials;
        u_avg.push(quad.integrate(|x, y| mono.eval_poly(coeffs, x, y)) / poly.area());
    }
    let mut marked_flag = vec![0.0; nc];
    for &c in state.marked {
        marked_flag[c] = 1.0;
    }
    write_vtk(
        &dir.join(format!("mesh_{}.vtk", state.iter)),
        state.mesh,
        &[
            ("u_avg", &u_avg),
            ("cell_indicator", &state.indicators.cell_term),
            ("score", &state.indicators.score),
            ("marked", &marked_flag),
        ],
    )
}

/// One row per iteration, matching the adaptive run log.
pub fn write_run_csv(path: &Path, log: &RunLog) -> Result<(), IoError> {
    let mut s = String::from(
        "iter,ndof,estimator,err,eta_sum,xi_sum,sigma_sum,n_cells,cut_G_count,cut_K_count\n",
    );
    for r in &log.rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.n_dofs,
            r.estimate,
            r.error,
            r.cell_sum,
            r.edge_sum,
            r.sigma_sum,
            r.n_cells,
            r.cut_g_count,
            r.cut_k_count
        )
        .expect("string writes cannot fail");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Per-cell and per-edge indicator dump of one iteration. Cell rows
/// carry the residual/stabilisation data plus the data-oscillation
/// diagnostic; edge rows carry the jump data.
pub fn write_indicators_csv(path: &Path, state: &IterationState) -> Result<(), IoError> {
    let ind = state.indicators;
    let mut s = String::from(
        "row_type,id,eta_sq,sigma_tilde_sq,sigma_sq,m_k,w_k,score,f_osc,jump_norm,xi_sq\n",
    );
    for ci in 0..state.mesh.num_cells() {
        let poly = &state.mesh.cell(ci).polygon;
        let f_osc = {
            // || f - f_bar ||_L2(K), a diagnostic column only.
            let quad = polygon_quadrature(poly, 4).map_err(AdaptError::from)?;
            let fb = state.elements[ci].f_bar;
            let val = quad.integrate(|x, y| {
                let d = (state.case.forcing)(x, y) - fb;
                d * d
            });
            val.max(0.0).sqrt()
        };
        writeln!(
            s,
            "cell,{},{},{},{},{},{},{},{},,",
            ci,
            ind.cell_term[ci],
            ind.sigma_tilde_sq[ci],
            ind.sigma_sq[ci],
            ind.m_factor[ci],
            ind.weight[ci],
            ind.score[ci],
            f_osc
        )
        .expect("string writes cannot fail");
    }
    for ei in 0..state.mesh.num_edges() {
        writeln!(s, "edge,{},,,,,,,,{},{}", ei, ind.jump_norm[ei], ind.edge_term[ei])
            .expect("string writes cannot fail");
    }
    fs::write(path, s)?;
    Ok(())
}

/// Legacy ASCII VTK unstructured grid with polygon cells and the given
/// per-cell scalar arrays.
pub fn write_vtk(path: &Path, mesh: &Mesh, cell_data: &[(&str, &[f64])]) -> Result<(), IoError> {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str("polygonal mesh\n");
    s.push_str("ASCII\n");
    s.push_str("DATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {} double", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {} 0", p.x, p.y).unwrap();
    }
    let conn_size: usize = mesh.cells().iter().map(|c| c.vertex_ids.len() + 1).sum();
    writeln!(s, "CELLS {} {}", mesh.num_cells(), conn_size).unwrap();
    for cell in mesh.cells() {
        write!(s, "{}", cell.vertex_ids.len()).unwrap();
        for &v in &cell.vertex_ids {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    writeln!(s, "CELL_TYPES {}", mesh.num_cells()).unwrap();
    for _ in 0..mesh.num_cells() {
        s.push_str("7\n");
    }
    if !cell_data.is_empty() {
        writeln!(s, "CELL_DATA {}", mesh.num_cells()).unwrap();
        for (name, values) in cell_data {
            assert_eq!(values.len(), mesh.num_cells());
            writeln!(s, "SCALARS {name} double 1").unwrap();
            s.push_str("LOOKUP_TABLE default\n");
            for v in *values {
                writeln!(s, "{v}").unwrap();
            }
        }
    }
    fs::write(path, s)?;
    Ok(())
}

/// Reads back the points and connectivity of a VTK file written by
/// [`write_vtk`].
pub fn read_vtk_mesh(path: &Path) -> Result<(Vec<Point2>, Vec<Vec<usize>>), IoError> {
    let text = fs::read_to_string(path)?;
    let fail = |message: &str| IoError::Parse {
        file: path.display().to_string(),
        message: message.into(),
    };
    let mut lines = text.lines();
    let mut points = Vec::new();
    let mut cells = Vec::new();
    while let Some(line) = lines.next() {
        if let Some(rest) = line.strip_prefix("POINTS ") {
            let n: usize = rest
                .split_whitespace()
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("bad POINTS header"))?;
            for _ in 0..n {
                let l = lines.next().ok_or_else(|| fail("truncated POINTS"))?;
                let mut it = l.split_whitespace();
                let x: f64 = it.next().unwrap_or("").parse().map_err(|_| fail("bad point"))?;
                let y: f64 = it.next().unwrap_or("").parse().map_err(|_| fail("bad point"))?;
                points.push(Point2::new(x, y));
            }
        } else if let Some(rest) = line.strip_prefix("CELLS ") {
            let n: usize = rest
                .split_whitespace()
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| fail("bad CELLS header"))?;
            for _ in 0..n {
                let l = lines.next().ok_or_else(|| fail("truncated CELLS"))?;
                let mut it = l.split_whitespace();
                let m: usize = it.next().unwrap_or("").parse().map_err(|_| fail("bad cell"))?;
                let ids: Vec<usize> = it
                    .map(|t| t.parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| fail("bad cell index"))?;
                if ids.len() != m {
                    return Err(fail("cell length mismatch"));
                }
                cells.push(ids);
            }
        }
    }
    Ok((points, cells))
}

/// Plain-text mesh format: vertex count and coordinates, then cell
/// count and index loops.
pub fn write_mesh_text(path: &Path, mesh: &Mesh) -> Result<(), IoError> {
    let mut s = String::new();
    writeln!(s, "{}", mesh.num_vertices()).unwrap();
    for p in mesh.vertices() {
        writeln!(s, "{} {}", p.x, p.y).unwrap();
    }
    writeln!(s, "{}", mesh.num_cells()).unwrap();
    for cell in mesh.cells() {
        write!(s, "{}", cell.vertex_ids.len()).unwrap();
        for &v in &cell.vertex_ids {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn read_mesh_text(path: &Path) -> Result<Mesh, IoError> {
    let text = fs::read_to_string(path)?;
    let fail = |message: &str| IoError::Parse {
        file: path.display().to_string(),
        message: message.into(),
    };
    let mut lines = text.lines();
    let nv: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| fail("bad vertex count"))?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next().ok_or_else(|| fail("truncated vertices"))?;
        let mut it = l.split_whitespace();
        let x: f64 = it.next().unwrap_or("").parse().map_err(|_| fail("bad coordinate"))?;
        let y: f64 = it.next().unwrap_or("").parse().map_err(|_| fail("bad coordinate"))?;
        vertices.push(Point2::new(x, y));
    }
    let nc: usize = lines
        .next()
        .and_then(|l| l.trim().parse().ok())
        .ok_or_else(|| fail("bad cell count"))?;
    let mut loops = Vec::with_capacity(nc);
    for _ in 0..nc {
        let l = lines.next().ok_or_else(|| fail("truncated cells"))?;
        let mut it = l.split_whitespace();
        let m: usize = it.next().unwrap_or("").parse().map_err(|_| fail("bad cell size"))?;
        let ids: Vec<usize> = it
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| fail("bad cell index"))?;
        if ids.len() != m {
            return Err(fail("cell length mismatch"));
        }
        loops.push(ids);
    }
    Mesh::from_cells(vertices, loops)
        .map_err(|e| fail(&format!("invalid mesh: {e}")))
}

/// Least-squares slope of log(err) against log(n), dropping `burn_in`
/// leading rows. Rows with non-positive values are skipped.
pub fn fit_rate(points: &[(f64, f64)], burn_in: usize) -> Result<f64, IoError> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .skip(burn_in)
        .filter(|&&(n, e)| n > 0.0 && e > 0.0)
        .map(|&(n, e)| (n.ln(), e.ln()))
        .collect();
    if data.len() < 2 {
        return Err(IoError::InsufficientData);
    }
    let m = data.len() as f64;
    let mean_x: f64 = data.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y: f64 = data.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = data.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = data.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    if sxx == 0.0 {
        return Err(IoError::InsufficientData);
    }
    Ok(sxy / sxx)
}

fn write_summary(path: &Path, config: &CliConfig, summary: &RunSummary) -> Result<(), IoError> {
    let mut s = String::new();
    writeln!(s, "case = {}", config.case).unwrap();
    writeln!(s, "order = {}", config.order).unwrap();
    writeln!(s, "estimator = {}", config.estimator).unwrap();
    writeln!(s, "theta = {}", config.theta).unwrap();
    writeln!(s, "tol = {}", config.tol).unwrap();
    writeln!(s, "grid_n = {}", config.grid_n).unwrap();
    writeln!(s, "seed = {}", config.seed).unwrap();
    writeln!(s, "iterations = {}", summary.iterations).unwrap();
    writeln!(s, "final_ndof = {}", summary.final_dofs).unwrap();
    writeln!(s, "final_cells = {}", summary.final_cells).unwrap();
    writeln!(s, "final_err = {}", summary.final_error).unwrap();
    writeln!(s, "final_estimator = {}", summary.final_estimate).unwrap();
    match summary.rate {
        Some(m) => writeln!(s, "rate_m = {m}").unwrap(),
        None => writeln!(s, "rate_m = n/a").unwrap(),
    }
    fs::write(path, s)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::initial_mesh;
    use approx::assert_relative_eq;

    #[test]
    fn rate_fit_exact_power_laws() {
        // err = n^(-1/2).
        let pts: Vec<(f64, f64)> =
            (1..12).map(|i| (100.0 * i as f64, (100.0 * i as f64).powf(-0.5))).collect();
        assert_relative_eq!(fit_rate(&pts, 3).unwrap(), -0.5, max_relative = 1e-12);
        // err = 3 n^(-1).
        let pts: Vec<(f64, f64)> =
            (1..12).map(|i| (50.0 * i as f64, 3.0 / (50.0 * i as f64))).collect();
        assert_relative_eq!(fit_rate(&pts, 3).unwrap(), -1.0, max_relative = 1e-12);
    }

    #[test]
    fn rate_fit_noisy_power_law() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<(f64, f64)> = (1..40)
            .map(|i| {
                let n = 30.0 * 1.5f64.powi(i);
                let noise = 1.0 + rng.gen_range(-0.05..0.05);
                (n, 2.0 * n.powf(-0.7) * noise)
            })
            .collect();
        let m = fit_rate(&pts, 3).unwrap();
        assert!((m + 0.7).abs() <= 0.05, "rate {m}");
    }

    #[test]
    fn rate_fit_needs_enough_rows() {
        assert!(matches!(
            fit_rate(&[(10.0, 1.0), (20.0, 0.5)], 3),
            Err(IoError::InsufficientData)
        ));
    }

    #[test]
    fn mesh_text_round_trip() {
        let dir = std::env::temp_dir().join("anisovem_io_test_mesh");
        fs::create_dir_all(&dir).unwrap();
        let mut mesh = initial_mesh(3);
        let c = mesh.cell(4).polygon.centroid();
        mesh.split_cell(4, c, crate::geometry::Vec2::new(1.0, 0.3).normalize()).unwrap();
        let path = dir.join("mesh.txt");
        write_mesh_text(&path, &mesh).unwrap();
        let back = read_mesh_text(&path).unwrap();
        assert_eq!(back.num_vertices(), mesh.num_vertices());
        assert_eq!(back.num_cells(), mesh.num_cells());
        for (a, b) in back.vertices().iter().zip(mesh.vertices()) {
            assert_eq!(a, b, "coordinates must round-trip exactly");
        }
        for (ca, cb) in back.cells().iter().zip(mesh.cells()) {
            assert_eq!(ca.vertex_ids, cb.vertex_ids);
        }
    }

    #[test]
    fn vtk_round_trip() {
        let dir = std::env::temp_dir().join("anisovem_io_test_vtk");
        fs::create_dir_all(&dir).unwrap();
        let mut mesh = initial_mesh(2);
        let c = mesh.cell(1).polygon.centroid();
        mesh.split_cell(1, c, crate::geometry::Vec2::new(0.2, 1.0).normalize()).unwrap();
        let path = dir.join("mesh.vtk");
        let data: Vec<f64> = (0..mesh.num_cells()).map(|i| i as f64 * 0.5).collect();
        write_vtk(&path, &mesh, &[("score", &data)]).unwrap();
        let (points, cells) = read_vtk_mesh(&path).unwrap();
        assert_eq!(points.len(), mesh.num_vertices());
        assert_eq!(cells.len(), mesh.num_cells());
        for (a, b) in points.iter().zip(mesh.vertices()) {
            assert_eq!(a, b);
        }
        for (ca, cb) in cells.iter().zip(mesh.cells()) {
            assert_eq!(ca, &cb.vertex_ids);
        }
    }

    #[test]
    fn unknown_case_and_estimator_rejected() {
        let config = CliConfig { case: "nope".into(), ..CliConfig::default() };
        assert!(matches!(run(&config), Err(IoError::UnknownCase(_))));
        let config = CliConfig {
            estimator: "nope".into(),
            out_dir: std::env::temp_dir().join("anisovem_unused"),
            ..CliConfig::default()
        };
        assert!(matches!(run(&config), Err(IoError::UnknownEstimator(_))));
    }
}
