use anisovem::cases;
use anisovem::mesh::initial_mesh;
use anisovem::recovery::recover;
use anisovem::vem::{assemble, build_elements, project_solution, projected_h1_error, solve, DofMap};
use anisovem::estimator::{estimate, EstimatorKind};
use anisovem::adapt::{adaptive_loop, AdaptConfig};
use std::time::Instant;

fn main() {
    // Build a large case-2 mesh by running the loop to ~120k dofs.
    let config = AdaptConfig {
        order: 1, kind: EstimatorKind::Heuristic, error_tol: 4.2e-2,
        max_iters: 40, max_dofs: 1_000_000, grid_n: 4, ..AdaptConfig::default()
    };
    let t = Instant::now();
    let log = adaptive_loop(&config, &cases::case2()).unwrap();
    println!("setup run: {} iters, {} dofs, {:.1?}", log.rows.len(), log.final_record().unwrap().n_dofs, t.elapsed());
    // Rebuild that mesh state once more, timing each phase.
    let case = cases::case2();
    let mut mesh = initial_mesh(4);
    // replay: run the loop again recording the mesh via observer at the end
    let mut final_mesh = None;
    anisovem::adapt::adaptive_loop_with(&config, &case, |st| {
        final_mesh = Some(st.mesh.clone());
    }).unwrap();
    mesh = final_mesh.unwrap();
    println!("mesh: {} cells {} vertices", mesh.num_cells(), mesh.num_vertices());

    let t = Instant::now();
    let dofmap = DofMap::new(&mesh, 1);
    println!("dofmap: {:.2?}", t.elapsed());
    let t = Instant::now();
    let elements = build_elements(&mesh, 1, &case.forcing, 4).unwrap();
    println!("elements: {:.2?}", t.elapsed());
    let t = Instant::now();
    let system = assemble(&mesh, &dofmap, &elements, &case.u);
    println!("assemble: {:.2?} (n_free {})", t.elapsed(), system.n_free());
    let t = Instant::now();
    let u = solve(&system, 1e-12).unwrap();
    println!("solve: {:.2?}", t.elapsed());
    let t = Instant::now();
    let proj = project_solution(&dofmap, &elements, &u);
    println!("project: {:.2?}", t.elapsed());
    let t = Instant::now();
    let rec = recover(&mesh, &elements, &proj, 1).unwrap();
    println!("recover: {:.2?}", t.elapsed());
    let t = Instant::now();
    let ind = estimate(&mesh, &dofmap, &elements, &u, &proj, Some(&rec), EstimatorKind::Heuristic).unwrap();
    println!("estimate: {:.2?} (global {:.3e})", t.elapsed(), ind.global);
    let t = Instant::now();
    let err = projected_h1_error(&mesh, &elements, &proj, &case.grad, 4).unwrap();
    println!("error measure: {:.2?} ({err:.3e})", t.elapsed());
}
