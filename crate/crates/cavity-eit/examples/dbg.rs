use cavity_eit::model::*;
use cavity_eit::steady_state::*;
use num_complex::Complex64;

fn main() {
    // empty cavity: g=0, delta=0, eps=0.1, kappa_a=1
    let p = SystemParams::new(0.0, 1.0, 0.0, 0.6, 0.6, 0.0, 0.0, 0.1).unwrap();
    let s = HilbertSpace::new(3).unwrap();
    let rho = solve_steady_state(&p, &s).unwrap();
    let a = s.annihilation();
    let am = rho.expectation(&a);
    println!("empty cavity <a> = {am}  (expect -i*0.1 = (0, -0.1))");
    println!("residual = {:.3e}", rho.residual);
    let n = rho.expectation(&(a.adjoint() * &a)).re;
    println!("n_intra = {n:.6e} (expect 0.01)");

    // diag of rho
    for i in 0..s.dim() {
        let v = rho.matrix()[(i, i)].re;
        if v.abs() > 1e-12 {
            println!("rho[{i},{i}] = {v:.6e}");
        }
    }

    // Check Liouvillian action on a simple test matrix against direct computation
    let sup = liouvillian(&p, &s).unwrap();
    let d = s.dim();
    // test rho: |1,0><1,0|
    let mut test = nalgebra::DMatrix::<Complex64>::zeros(d, d);
    test[(0, 0)] = Complex64::ONE;
    // direct drho/dt = -i[H,rho] + dissipator
    let h = build_hamiltonian(&p, &s);
    let ls = build_collapse_operators(&p, &s).unwrap();
    let direct = (&h * &test - &test * &h) * Complex64::new(0.0, -1.0) + apply_dissipator(&ls, &test);
    // via superop
    let mut vec = nalgebra::DVector::<Complex64>::zeros(d * d);
    for j in 0..d { for i in 0..d { vec[j * d + i] = test[(i, j)]; } }
    let out = &sup * &vec;
    let mut max_diff = 0.0f64;
    for j in 0..d { for i in 0..d {
        let diff = (out[j * d + i] - direct[(i, j)]).norm();
        if diff > max_diff { max_diff = diff; }
    }}
    println!("superop vs direct max diff = {max_diff:.3e}");
}
