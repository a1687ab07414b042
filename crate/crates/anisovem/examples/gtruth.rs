use anisovem::adapt::{adaptive_loop_with, AdaptConfig};
use anisovem::cases;
use anisovem::estimator::EstimatorKind;
use anisovem::geometry::{polygon_quadrature, sym_eig2, Mat2, SymMat2};

fn main() {
    let case = cases::case2();
    let config = AdaptConfig {
        order: 1, kind: EstimatorKind::Heuristic, error_tol: 1e-9,
        max_iters: 13, max_dofs: 150_000, grid_n: 4, ..AdaptConfig::default()
    };
    adaptive_loop_with(&config, &case, |st| {
        if st.iter != 12 { return; }
        let mesh = st.mesh;
        let nc = mesh.num_cells();
        // true local tensors
        let mut true_local = vec![Mat2::zeros(); nc];
        for ci in 0..nc {
            let poly = &mesh.cell(ci).polygon;
            let quad = polygon_quadrature(poly, 6).unwrap();
            let coeffs = &st.projection.cells[ci].value;
            let mono = &st.elements[ci].monomials;
            let mut t = Mat2::zeros();
            for (p, &w) in quad.points.iter().zip(&quad.weights) {
                let ge = (case.grad)(p.x, p.y) - mono.eval_poly_grad(coeffs, p.x, p.y);
                t += ge * ge.transpose() * w;
            }
            true_local[ci] = t;
        }
        let incidence = mesh.vertex_cell_incidence();
        let rec = st.recovery.unwrap();
        println!("cell cx cy | zz: trace ratio angle | true: trace ratio angle");
        let mut shown = 0;
        for ci in 0..nc {
            let poly = &mesh.cell(ci).polygon;
            let c = poly.centroid();
            if c.x < 0.85 || (ci % 7 != 0) { continue; }
            let mut g_true = Mat2::zeros();
            for k in mesh.cell_patch_from_incidence(ci, &incidence) {
                g_true += true_local[k];
            }
            let ez = sym_eig2(&SymMat2::from_matrix(&rec.g_tensor[ci]));
            let et = sym_eig2(&SymMat2::from_matrix(&g_true));
            println!("{:4} {:.3} {:.3} | {:9.2e} {:7.1} {:5.1} | {:9.2e} {:7.1} {:5.1}",
                ci, c.x, c.y,
                rec.g_tensor[ci].trace(), ez.lambda1/ez.lambda2.max(1e-300), ez.r1.y.atan2(ez.r1.x).to_degrees(),
                g_true.trace(), et.lambda1/et.lambda2.max(1e-300), et.r1.y.atan2(et.r1.x).to_degrees());
            shown += 1;
            if shown > 25 { break; }
        }
    }).unwrap();
}
