//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Oracles here are computed independently of the library routines
//! they check wherever that is practical.

mod common;

use std::process::Command;
use std::time::Instant;

use common::*;
use gptkit::channels::{compose, is_post_processing_of, simplex_dual_basis, Channel};
use gptkit::compatibility::{
    broadcasting_feasible, certify_incompatibility, compatibility_robustness, measurements_compatible,
    noisy_measurement, Compatibilizer,
};
use gptkit::effects::{effect_algebra, state_space_of_effects};
use gptkit::geometry::{kron, max_abs_diff, same_point_set, vector, Matrix, Vector};
use gptkit::models::{pr_box_state, square_reflection, square_rotation};
use gptkit::norms::{base_norm, discrimination_probability, dual_norm_oracle};
use gptkit::qubit::{qubit_discrimination, BlochState};
use gptkit::state_space::{boxworld_square, regular_polygon, simplex, StateSpace};
use gptkit::tensor::{
    entangled_vertices, is_separable, max_tensor_vertices, min_equals_max, Separability, TensorRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spaces() -> Vec<StateSpace> {
    let mut v: Vec<StateSpace> = (2..=5).map(|n| simplex(n).unwrap()).collect();
    v.push(boxworld_square());
    v.push(regular_polygon(5).unwrap());
    v
}

fn four() -> Vec<StateSpace> {
    vec![simplex(2).unwrap(), simplex(3).unwrap(), boxworld_square(), regular_polygon(5).unwrap()]
}

fn fx() -> Vector {
    vector(&[1.0, 0.0, 0.0])
}

fn fy() -> Vector {
    vector(&[0.0, 1.0, 0.0])
}

/// Effects sampled from the library are trusted only after a direct check
/// against every vertex.
fn check_effect_vertices(k: &StateSpace, effects: &[Vector]) -> Result<(), String> {
    for f in effects {
        for x in k.vertices() {
            let p = x.dot(f);
            ensure((-1e-9..=1.0 + 1e-9).contains(&p), || format!("{}: effect value {p} outside [0,1]", k.name()))?;
        }
    }
    Ok(())
}

fn duality_roundtrip() -> Check {
    let mut worst: f64 = 0.0;
    for k in spaces() {
        let alg = effect_algebra(&k).map_err(err)?;
        check_effect_vertices(&k, &alg.effect_vertices)?;
        let rt = state_space_of_effects(&alg.effect_vertices, &alg.unit).map_err(err)?;
        let mapped: Vec<Vector> = k.vertices().iter().map(|v| &rt.transform * v).collect();
        ensure(same_point_set(rt.space.vertices(), &mapped, 1e-7), || format!("{}: vertex sets differ", k.name()))?;
        for v in &mapped {
            let d = rt.space.vertices().iter().map(|w| max_abs_diff(v, w)).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    Ok(format!("6 spaces, max vertex error {worst:.1e}"))
}

fn norm_duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for k in spaces() {
        let alg = effect_algebra(&k).map_err(err)?;
        check_effect_vertices(&k, &alg.effect_vertices)?;
        for _ in 0..1000 {
            let psi = random_functional(&mut rng, k.lifted_dim());
            let b = base_norm(&k, &psi).map_err(err)?;
            let d = dual_norm_oracle(&k, &psi).map_err(err)?;
            // sup over E(K) of |⟨ψ, 2f − 1⟩| is attained at an effect vertex
            let direct = alg
                .effect_vertices
                .iter()
                .map(|f| psi.dot(&(f * 2.0 - &alg.unit)).abs())
                .fold(0.0, f64::max);
            worst = worst.max((b - d).abs()).max((b - direct).abs());
            count += 1;
        }
    }
    ensure(worst <= 1e-7, || format!("max discrepancy {worst:.3e}"))?;
    Ok(format!("{count} functionals, max |base − dual| {worst:.1e}"))
}

fn discrimination_theorem() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let all = spaces();
    for i in 0..240 {
        let k = &all[i % all.len()];
        let alg = effect_algebra(k).map_err(err)?;
        let x0 = random_state(&mut rng, k);
        let x1 = random_state(&mut rng, k);
        let l: f64 = rng.gen_range(0.0..1.0);
        let brute = alg
            .effect_vertices
            .iter()
            .map(|f| l * x0.dot(f) + (1.0 - l) * (1.0 - x1.dot(f)))
            .fold(f64::NEG_INFINITY, f64::max);
        let psi = &x0 * l - &x1 * (1.0 - l);
        let formula = 0.5 * (1.0 + base_norm(k, &psi).map_err(err)?);
        let lib = discrimination_probability(k, &x0, &x1, l, 1e-9).map_err(err)?.p_succ;
        worst = worst.max((brute - formula).abs()).max((lib - formula).abs());
    }
    ensure(worst <= 1e-7, || format!("max discrepancy {worst:.3e}"))?;
    let sq = boxworld_square();
    let p = discrimination_probability(&sq, &vector(&[0.0, 0.0, 1.0]), &sq.center(), 0.5, 1e-9)
        .map_err(err)?
        .p_succ;
    ensure((p - 0.75).abs() <= 1e-9, || format!("s00 vs center gave {p}"))?;
    Ok(format!("240 instances, max error {worst:.1e}; s00 vs center {p}"))
}

fn verify_witness(a: &StateSpace, b: &StateSpace, v: &Vector, w: &Vector) -> Result<(), String> {
    for x in a.vertices() {
        for y in b.vertices() {
            let p = kron(x, y).dot(w);
            ensure(p >= -1e-9, || format!("witness negative on a product state: {p}"))?;
        }
    }
    let value = v.dot(w);
    ensure(value < -1e-9, || format!("witness does not detect the state: {value}"))
}

fn entanglement_existence() -> Check {
    let zoo = four();
    let mut pairs = 0;
    for i in 0..zoo.len() {
        for j in i..zoo.len() {
            let (a, b) = (&zoo[i], &zoo[j]);
            let got = min_equals_max(a, b).map_err(err)?;
            let expected = a.is_simplex() || b.is_simplex();
            ensure(got == expected, || format!("{}⊗{}: min_equals_max {got}", a.name(), b.name()))?;
            pairs += 1;
        }
    }
    let sq = boxworld_square();
    let ent = entangled_vertices(&sq, &sq).map_err(err)?;
    ensure(!ent.is_empty(), || "no entangled vertex found".into())?;
    for (v, w) in &ent {
        verify_witness(&sq, &sq, v, &w.functional)?;
    }
    let x0 = pr_box_state();
    match is_separable(&sq, &sq, &x0, 1e-9).map_err(err)? {
        Separability::Entangled { witness } => verify_witness(&sq, &sq, &x0, &witness.functional)?,
        Separability::Separable { .. } => return Err("x0 reported separable".into()),
    }
    Ok(format!("{pairs} pairs agree; {} entangled square vertices; x0 entangled", ent.len()))
}

/// `Φ_D = Σ_i (s_i ⊗ s_i) b_iᵀ`.
fn classical_copy(n: usize) -> Matrix {
    let s = simplex(n).unwrap();
    let mut m = Matrix::zeros(n * n, n);
    for (x, b) in s.vertices().iter().zip(simplex_dual_basis(n)) {
        m += kron(x, x) * b.transpose();
    }
    m
}

fn no_broadcasting() -> Check {
    for n in [2, 3] {
        let s = simplex(n).unwrap();
        let v = broadcasting_feasible(&s, s.vertices(), &TensorRule::Max, 1e-9).map_err(err)?;
        ensure(v.compatible, || format!("S_{n} not broadcastable"))?;
        let Some(Compatibilizer::Channel(j)) = v.joint else {
            return Err(format!("S_{n}: no joint channel returned"));
        };
        let diff = (&j.matrix - classical_copy(n)).amax();
        ensure(diff < 1e-7, || format!("S_{n}: joint differs from the copy channel by {diff:.3e}"))?;
    }
    for k in [boxworld_square(), regular_polygon(5).unwrap()] {
        let v = broadcasting_feasible(&k, k.vertices(), &TensorRule::Max, 1e-9).map_err(err)?;
        ensure(!v.compatible, || format!("{} broadcastable", k.name()))?;
        let y = v.farkas.as_ref().ok_or_else(|| format!("{}: no Farkas vector", k.name()))?;
        // yᵀA ≤ 0 and yᵀb > 0, checked by hand
        let ya = v.program.constraints.tr_mul(y);
        let yb = y.dot(&v.program.rhs);
        ensure(ya.max() <= 1e-9 && yb >= 1e-7, || format!("{}: certificate fails (max yᵀA {:.2e}, yᵀb {yb:.2e})", k.name(), ya.max()))?;
        ensure(v.program.certifies_infeasibility(y, 1e-9, 1e-7), || "library check disagrees".into())?;
    }
    Ok("S_2, S_3 copy via Φ_D; square and pentagon refuted with verified certificates".into())
}

fn robustness_threshold() -> Check {
    let sq = boxworld_square();
    let m1 = two_outcome(&sq, fx());
    let m2 = two_outcome(&sq, fy());
    let t = compatibility_robustness(&m1, &m2, 1e-9).map_err(err)?;
    ensure((t - 0.5).abs() <= 1e-6, || format!("t* = {t}"))?;
    let at = |t: f64| -> Result<bool, String> {
        let a = noisy_measurement(&m1, t, 1e-9).map_err(err)?;
        let b = noisy_measurement(&m2, t, 1e-9).map_err(err)?;
        Ok(measurements_compatible(&a, &b, 1e-9).map_err(err)?.compatible)
    };
    ensure(at(0.5)?, || "infeasible at t = 0.5".into())?;
    ensure(!at(0.5 + 1e-4)?, || "feasible at t = 0.5001".into())?;
    Ok(format!("t* = {t:.9}; feasible at 0.5, infeasible at 0.5001"))
}

fn monogamy() -> Check {
    let sq = boxworld_square();
    let max = max_tensor_vertices(&sq, &sq).map_err(err)?;
    let mut pure = 0;
    for v in max.vertices() {
        // marginals by explicit index sums in the row-major layout
        let y = Vector::from_fn(3, |i, _| v[i * 3 + 2]);
        let z = Vector::from_fn(3, |j, _| v[6 + j]);
        let is_vertex = |p: &Vector| sq.vertices().iter().any(|w| max_abs_diff(w, p) < 1e-9);
        if is_vertex(&y) || is_vertex(&z) {
            pure += 1;
            let d = max_abs_diff(&kron(&y, &z), v);
            ensure(d <= 1e-7, || format!("vertex with pure marginal is not a product (error {d:.3e})"))?;
        }
    }
    ensure(pure > 0, || "no vertex with a pure marginal".into())?;
    Ok(format!("{} vertices, {pure} with a pure marginal, all products", max.num_vertices()))
}

fn certification() -> Check {
    let sq = boxworld_square();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut incompatible = 0;
    for i in 0..50 {
        let (m1, m2) = random_square_pair(&mut rng);
        let verdict = measurements_compatible(&m1, &m2, 1e-9).map_err(err)?.compatible;
        let certified =
            certify_incompatibility(&m1.channel, &m2.channel, sq.vertices(), &TensorRule::Max, 1e-9).map_err(err)?;
        ensure(certified == !verdict, || format!("pair {i}: compatible {verdict}, certified {certified}"))?;
        incompatible += usize::from(!verdict);
    }
    Ok(format!("50 pairs agree ({incompatible} incompatible)"))
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

fn random_bloch(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let w = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if w.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return w;
        }
    }
}

fn qubit_helstrom() -> Check {
    let sphere = fibonacci_sphere(10_000);
    let cs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (w0, w1) = (random_bloch(&mut rng), random_bloch(&mut rng));
        let l: f64 = rng.gen_range(0.0..1.0);
        let closed = qubit_discrimination(&BlochState::new(w0).unwrap(), &BlochState::new(w1).unwrap(), l)
            .map_err(err)?;
        // effect X = c·I + r·n·σ with r = min(c, 1 − c); success is
        // (1−λ) + c(2λ−1) + r·n·(λw0 − (1−λ)w1)
        let d: Vec<f64> = (0..3).map(|i| l * w0[i] - (1.0 - l) * w1[i]).collect();
        let best_dir = sphere
            .iter()
            .map(|n| n[0] * d[0] + n[1] * d[1] + n[2] * d[2])
            .fold(f64::NEG_INFINITY, f64::max);
        let grid = cs
            .iter()
            .map(|&c| (1.0 - l) + c * (2.0 * l - 1.0) + c.min(1.0 - c) * best_dir)
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((closed - grid).abs());
    }
    ensure(worst <= 2e-3, || format!("grid differs by {worst:.3e}"))?;
    let p = qubit_discrimination(&BlochState::new([1.0, 0.0, 0.0]).unwrap(), &BlochState::new([0.0, 0.0, 1.0]).unwrap(), 0.5)
        .map_err(err)?;
    ensure((p - 0.853553).abs() <= 1e-6, || format!("example gave {p}"))?;
    Ok(format!("100 pairs within {worst:.1e} of the grid; example {p:.6}"))
}

fn symmetry_algebra() -> Check {
    let r = square_rotation();
    let m = square_reflection();
    let r2 = compose(&r, &r).map_err(err)?;
    let r4 = compose(&r2, &r2).map_err(err)?;
    let m2 = compose(&m, &m).map_err(err)?;
    let id = Matrix::identity(3, 3);
    let e1 = (&r4.matrix - &id).amax();
    let e2 = (&m2.matrix - &id).amax();
    ensure(e1 <= 1e-12 && e2 <= 1e-12, || format!("R⁴ error {e1:.3e}, M² error {e2:.3e}"))?;
    Ok(format!("R⁴ and M² equal the identity (errors {e1:.0e}, {e2:.0e})"))
}

fn random_channel(rng: &mut ChaCha8Rng, i: usize) -> Channel {
    if i % 2 == 0 {
        random_square_channel(rng)
    } else {
        let s3 = simplex(3).unwrap();
        random_classical_channel(rng, &s3, &s3)
    }
}

fn post_processing_preorder() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let phi = random_channel(&mut rng, i);
        let lam = is_post_processing_of(&phi, &phi, 1e-9).map_err(err)?;
        let lam = lam.ok_or_else(|| format!("channel {i}: not a post-processing of itself"))?;
        let d = (&lam.matrix * &phi.matrix - &phi.matrix).amax();
        ensure(d < 1e-7, || format!("channel {i}: Λ∘Φ ≠ Φ ({d:.2e})"))?;
    }
    for i in 0..50 {
        let phi = random_channel(&mut rng, i);
        let l1 = random_channel(&mut rng, i);
        let l2 = random_channel(&mut rng, i);
        let psi = compose(&l1, &phi).map_err(err)?;
        let chi = compose(&l2, &psi).map_err(err)?;
        let a = is_post_processing_of(&psi, &phi, 1e-9).map_err(err)?.ok_or("ψ ⊀ φ")?;
        let b = is_post_processing_of(&chi, &psi, 1e-9).map_err(err)?.ok_or("χ ⊀ ψ")?;
        let via = compose(&b, &a).map_err(err)?;
        let d = (&via.matrix * &phi.matrix - &chi.matrix).amax();
        ensure(d < 1e-7, || format!("chain {i}: composed Λ misses by {d:.2e}"))?;
        ensure(is_post_processing_of(&chi, &phi, 1e-9).map_err(err)?.is_some(), || format!("chain {i}: χ ⊀ φ"))?;
    }
    let sq = boxworld_square();
    let mx = two_outcome(&sq, fx());
    let my = two_outcome(&sq, fy());
    let found = is_post_processing_of(&mx.channel, &my.channel, 1e-9).map_err(err)?;
    ensure(found.is_none(), || "f_x measurement post-processes f_y".into())?;
    Ok("reflexive on 100, transitive on 50 chains, f_x ⊀ f_y".into())
}

const CLI_RUN: &[&[&str]] = &[
    &["info", "--space", "builtin:polygon:5"],
    &["basenorm", "--space", "builtin:square", "--random", "50", "--seed", "2"],
    &["discriminate", "--space", "builtin:square", "--x0", "s00", "--x1", "center", "--lambda", "0.5"],
    &["discriminate", "--space", "builtin:square", "--x0", "s00", "--x1", "s11", "--lambda", "0.5"],
    &["tensor", "vertices", "--a", "builtin:square", "--b", "builtin:square"],
    &["tensor", "separable", "--a", "builtin:square", "--b", "builtin:square", "--state", "square.x0"],
    &["compat", "broadcast", "--space", "builtin:S_3"],
    &["compat", "broadcast", "--space", "builtin:square"],
    &["compat", "robustness", "--space", "builtin:square", "--m1", "fx", "--m2", "fy"],
    &["compat", "measurements", "--space", "builtin:square", "--m1", "fx", "--m2", "fy"],
    &["compat", "certify", "--space", "builtin:square", "--phi1", "fx", "--phi2", "fy"],
    &["compat", "steer", "--space", "builtin:square", "--phi1", "fx", "--phi2", "fy", "--state", "square.x0"],
    &["channel", "compose", "--space", "builtin:square", "--outer", "square.M", "--inner", "square.M"],
    &["channel", "postproc", "--space", "builtin:square", "--psi", "fx", "--phi", "fy"],
    &["qubit", "discriminate", "--w0", "[1,0,0]", "--w1", "[0,0,1]", "--lambda", "0.5"],
];

fn cli_pass() -> Result<Vec<u8>, String> {
    let mut all = Vec::new();
    for args in CLI_RUN {
        let out = Command::new(env!("CARGO_BIN_EXE_gptkit"))
            .args(*args)
            .env_remove("GPTKIT_TOL")
            .output()
            .map_err(err)?;
        ensure(out.status.code() == Some(0), || {
            format!("`{}` exited with {:?}: {}", args.join(" "), out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        all.extend_from_slice(&out.stdout);
    }
    Ok(all)
}

fn cli_determinism() -> Check {
    let a = cli_pass()?;
    let b = cli_pass()?;
    ensure(a == b, || "outputs differ between runs".into())?;
    Ok(format!("{} commands, {} bytes identical across two runs", CLI_RUN.len(), a.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("duality roundtrip", duality_roundtrip),
        ("norm duality", norm_duality),
        ("discrimination theorem", discrimination_theorem),
        ("entanglement existence", entanglement_existence),
        ("no-broadcasting", no_broadcasting),
        ("incompatibility threshold", robustness_threshold),
        ("monogamy", monogamy),
        ("certification equivalence", certification),
        ("qubit Helstrom", qubit_helstrom),
        ("symmetry algebra", symmetry_algebra),
        ("post-processing preorder", post_processing_preorder),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
