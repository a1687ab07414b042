use anisovem::cases;
use anisovem::vem::{assemble, build_elements, solve_with_stats, DofMap};
use anisovem::estimator::EstimatorKind;
use anisovem::adapt::{adaptive_loop_with, AdaptConfig};
use std::time::Instant;

fn main() {
    let config = AdaptConfig {
        order: 1, kind: EstimatorKind::Heuristic, error_tol: 4.2e-2,
        max_iters: 40, max_dofs: 1_000_000, grid_n: 4, ..AdaptConfig::default()
    };
    let case = cases::case2();
    let mut final_mesh = None;
    adaptive_loop_with(&config, &case, |st| { final_mesh = Some(st.mesh.clone()); }).unwrap();
    let mesh = final_mesh.unwrap();
    let dofmap = DofMap::new(&mesh, 1);
    let elements = build_elements(&mesh, 1, &case.forcing, 4).unwrap();
    let system = assemble(&mesh, &dofmap, &elements, &case.u);
    let t = Instant::now();
    let (_u, stats) = solve_with_stats(&system, 1e-12).unwrap();
    println!("n_free {} solve {:.2?} iters {} ic {}", system.n_free(), t.elapsed(), stats.iterations, stats.used_incomplete_cholesky);
}
