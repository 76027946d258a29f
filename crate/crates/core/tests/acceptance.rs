//! Acceptance criteria 1–12. Each criterion prints one PASS/FAIL line; the
//! test fails if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use moikit::calculus::{
    frechet_derivative, kth_derivative, sa_remainder, unitary_remainder, RemainderMethod,
    SeparableMultivariateFunction,
};
use moikit::documents::{from_json, to_json};
use moikit::harness::{
    ks_pvalue, ks_statistic, run_tail_bound, run_tail_bound_with_workers, TailBoundExperiment, TheoremId,
};
use moikit::linalg::matrix::{self, max_abs};
use moikit::linalg::operator::unitarity_deviation;
use moikit::linalg::random::{hermitian_with_norm, rng_from_seed, sample_haar_unitary, sample_random_hermitian, SeededRng};
use moikit::linalg::spectral::principal_phase;
use moikit::linalg::{operator_norm, RandomOperatorModel};
use moikit::moi::{
    continuity_modulus, evaluate_spectral, moi_linear_combination_check, moi_norm_bound, moi_partition_evaluate,
    moi_split_evaluate, perturbation_residual, NormMode,
};
use moikit::poly::{decompose_inner_powers, direction_count, to_linear_products, MonomialPolynomial};
use moikit::tensor::{fold_general, mti_evaluate, star_k, tensor_eigendecompose, HermitianTensor, Tensor};
use moikit::{
    ComplexMatrix, HermitianOperator, MultivariateFunction, Polynomial, ScalarFunction, SeparableIntegrand,
    SpectralDecomposition,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_hermitian(n: usize, rng: &mut SeededRng) -> HermitianOperator {
    let model = RandomOperatorModel::uniform(n, -1.0, 1.0).unwrap();
    sample_random_hermitian(&model, rng).unwrap()
}

fn random_matrix(n: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn random_poly(max_degree: usize, rng: &mut SeededRng) -> Polynomial {
    let d = rng.random_range(0..=max_degree);
    Polynomial::new((0..=d).map(|_| rng.random_range(-1.0..1.0)).collect())
}

fn random_factor(rng: &mut SeededRng) -> ScalarFunction {
    match rng.random_range(0..4) {
        0 => ScalarFunction::exp(),
        1 => ScalarFunction::sin(),
        _ => ScalarFunction::Polynomial(random_poly(3, rng)),
    }
}

fn random_separable(arity: usize, rng: &mut SeededRng) -> MultivariateFunction {
    let terms = (0..rng.random_range(1..=3))
        .map(|_| (0..arity).map(|_| random_factor(rng)).collect())
        .collect();
    MultivariateFunction::from_separable(SeparableIntegrand::new(arity, terms).unwrap())
}

fn spectra(ops: &[HermitianOperator]) -> Vec<&SpectralDecomposition> {
    ops.iter().map(|o| o.spectral().unwrap()).collect()
}

// 1. linearity, ⊕-split and partition factorization
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(101);
    let mut worst = [0.0_f64; 3];
    for inst in 0..100 {
        let n = 1 + inst % 4;
        let m = 2 + inst % 3;
        let ops: Vec<HermitianOperator> = (0..m).map(|_| random_hermitian(n, &mut rng)).collect();
        let s = spectra(&ops);
        let args: Vec<ComplexMatrix> = (0..m - 1).map(|_| random_matrix(n, &mut rng)).collect();
        let (phi, psi) = (random_separable(m, &mut rng), random_separable(m, &mut rng));
        let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let lin = moi_linear_combination_check(&phi, &psi, a, b, &s, &args).unwrap();
        worst[0] = worst[0].max(lin.relative());

        let k = rng.random_range(1..m);
        let (p1, p2) = (random_separable(k, &mut rng), random_separable(m - k, &mut rng));
        let whole = evaluate_spectral(&s, &MultivariateFunction::oplus(&p1, &p2), &args).unwrap();
        let split = moi_split_evaluate(&p1, &p2, &s, &args).unwrap();
        let scale = moikit::linalg::norms::scale_of(&[&whole, &split]);
        worst[1] = worst[1].max(operator_norm(&(&whole - &split)) / scale);

        // the (2,1,2) pattern on five operators
        let ops5: Vec<HermitianOperator> = (0..5).map(|_| random_hermitian(n, &mut rng)).collect();
        let s5 = spectra(&ops5);
        let args5: Vec<ComplexMatrix> = (0..4).map(|_| random_matrix(n, &mut rng)).collect();
        let parts = [random_separable(2, &mut rng), random_separable(1, &mut rng), random_separable(2, &mut rng)];
        let joined = MultivariateFunction::oplus(&MultivariateFunction::oplus(&parts[0], &parts[1]), &parts[2]);
        let whole = evaluate_spectral(&s5, &joined, &args5).unwrap();
        let fact = moi_partition_evaluate(&[2, 1, 2], &parts, &s5, &args5).unwrap();
        let scale = moikit::linalg::norms::scale_of(&[&whole, &fact]);
        worst[2] = worst[2].max(operator_norm(&(&whole - &fact)) / scale);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst.iter().all(|&w| w <= 1e-10) && secs <= 60.0,
        format!(
            "linearity {:.1e}, split {:.1e}, (2,1,2) partition {:.1e} (relative, tol 1e-10); {secs:.1}s",
            worst[0], worst[1], worst[2]
        ),
    )
}

/// `Σ ψ(λ_{i_1},…) P_{i_1} X_1 P_{i_2} ⋯ P_{i_m}` over all tuples.
fn projector_sum(s: &[&SpectralDecomposition], psi: &MultivariateFunction, args: &[ComplexMatrix]) -> ComplexMatrix {
    let m = s.len();
    let n = s[0].dim();
    let mut total = matrix::zeros(n);
    let mut idx = vec![0usize; m];
    loop {
        let lambda: Vec<Complex64> = idx.iter().zip(s).map(|(&i, sd)| sd.eigenvalues()[i]).collect();
        let w = psi.eval_complex(&lambda).unwrap();
        let mut p = s[0].projector(idx[0]);
        for j in 1..m {
            p = p * &args[j - 1] * s[j].projector(idx[j]);
        }
        total += p * w;
        let mut j = m;
        loop {
            if j == 0 {
                return total;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

// 2. rotated-basis evaluation against projector sums
fn criterion_2() -> Outcome {
    let mut rng = rng_from_seed(202);
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for n in [2, 3] {
        for m in [2, 3] {
            for variant in 0..6 {
                let ops: Vec<HermitianOperator> = (0..m)
                    .map(|j| {
                        if variant == 5 && j == 0 {
                            // repeated eigenvalue
                            let mut v = vec![0.5; n];
                            v[0] = -0.25;
                            HermitianOperator::from_eigenpairs(&v, moikit::linalg::random::haar_matrix(n, &mut rng).unwrap())
                                .unwrap()
                        } else {
                            random_hermitian(n, &mut rng)
                        }
                    })
                    .collect();
                let s = spectra(&ops);
                let args: Vec<ComplexMatrix> = (0..m - 1).map(|_| random_matrix(n, &mut rng)).collect();
                let psi = if variant % 2 == 0 {
                    random_separable(m, &mut rng)
                } else {
                    moikit::integrand::integrand_from_divided_difference(&ScalarFunction::exp(), m - 1).unwrap()
                };
                let fast = evaluate_spectral(&s, &psi, &args).unwrap();
                let slow = projector_sum(&s, &psi, &args);
                worst = worst.max(max_abs(&(fast - slow)));
                cases += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{cases} cases, max entry difference {worst:.1e} (tol 1e-10)"))
}

// 3. perturbation formula
fn criterion_3() -> Outcome {
    let mut rng = rng_from_seed(303);
    let mut worst = 0.0_f64;
    for inst in 0..100 {
        let m = 1 + inst % 3;
        let f = ScalarFunction::Polynomial(random_poly(5, &mut rng));
        let ops: Vec<HermitianOperator> = (0..m).map(|_| random_hermitian(4, &mut rng)).collect();
        let refs: Vec<&HermitianOperator> = ops.iter().collect();
        let c = random_hermitian(4, &mut rng);
        let d = random_hermitian(4, &mut rng);
        let args: Vec<ComplexMatrix> = (0..m).map(|_| random_matrix(4, &mut rng)).collect();
        let pos = rng.random_range(1..=m + 1);
        let r = perturbation_residual(&f, &refs, pos, &c, &d, &args).unwrap();
        worst = worst.max(r.residual);
    }
    outcome(worst <= 1e-9, format!("max residual {worst:.1e} over 100 instances (tol 1e-9)"))
}

// 4. continuity estimate and linear decay
fn criterion_4() -> Outcome {
    let mut rng = rng_from_seed(404);
    let deltas = [1e-2, 1e-3, 1e-4];
    let mut dominated = true;
    let mut worst_ratio = 0.0_f64;
    for inst in 0..30 {
        let n_args = inst % 3;
        let deg = 2 + inst % 3;
        let mut coeffs: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
        coeffs[deg] = 1.0;
        let f = ScalarFunction::polynomial(coeffs);
        let ops: Vec<HermitianOperator> = (0..=n_args).map(|_| random_hermitian(3, &mut rng)).collect();
        let es: Vec<ComplexMatrix> = (0..=n_args).map(|_| hermitian_with_norm(3, 1.0, &mut rng)).collect();
        let args: Vec<ComplexMatrix> = (0..n_args).map(|_| random_matrix(3, &mut rng)).collect();
        let refs: Vec<&HermitianOperator> = ops.iter().collect();
        let mut lhs = Vec::new();
        for &delta in &deltas {
            let pert: Vec<HermitianOperator> =
                ops.iter().zip(&es).map(|(a, e)| a.add_scaled(e, delta).unwrap()).collect();
            let prefs: Vec<&HermitianOperator> = pert.iter().collect();
            let c = continuity_modulus(&f, &refs, &prefs, &args).unwrap();
            dominated &= c.certified && c.lhs <= c.bound * (1.0 + 1e-12);
            lhs.push(c.lhs);
        }
        for w in lhs.windows(2) {
            // linear decay predicts a ratio of exactly 10
            worst_ratio = worst_ratio.max(((w[0] / w[1]) / 10.0 - 1.0).abs());
        }
    }
    outcome(
        dominated && worst_ratio <= 0.2,
        format!("lhs ≤ bound: {dominated}; worst deviation from linear decay {:.2}% (tol 20%)", 100.0 * worst_ratio),
    )
}

// 5. norm estimates in operator and Schatten modes
fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(505);
    let modes = [
        NormMode::Operator,
        NormMode::Schatten(vec![2.0, 2.0]),
        NormMode::Schatten(vec![3.0, 1.5]),
    ];
    let mut violations = 0;
    let mut max_ratio = 0.0_f64;
    for inst in 0..200 {
        let n = 2 + inst % 3;
        let ops: Vec<HermitianOperator> = (0..3).map(|_| random_hermitian(n, &mut rng)).collect();
        let s = spectra(&ops);
        let args: Vec<ComplexMatrix> = (0..2).map(|_| random_matrix(n, &mut rng)).collect();
        let psi = random_separable(3, &mut rng);
        for mode in &modes {
            let b = moi_norm_bound(&psi, &s, &args, mode).unwrap();
            if b.actual > b.bound * (1.0 + 1e-12) {
                violations += 1;
            }
            max_ratio = max_ratio.max(b.actual / b.bound);
        }
    }
    outcome(
        violations == 0,
        format!("600 checks (operator, p=(2,2), p=(3,3/2)), {violations} violations, max actual/bound {max_ratio:.3}"),
    )
}

fn apply(f: &ScalarFunction, m: &ComplexMatrix) -> ComplexMatrix {
    HermitianOperator::new(m.clone()).unwrap().apply(f).unwrap()
}

fn rel(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    operator_norm(&(a - b)) / operator_norm(b).max(1e-300)
}

// 6. derivatives against finite differences and scalar values
fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(606);
    let functions = [
        ScalarFunction::exp(),
        ScalarFunction::sin(),
        ScalarFunction::polynomial(vec![0.3, -1.0, 0.5, 1.0, -0.2]),
    ];
    let mut fre = 0.0_f64;
    let mut kth = 0.0_f64;
    let mut scalar = 0.0_f64;
    for (fi, f) in functions.iter().enumerate() {
        for _ in 0..5 {
            let a = random_hermitian(3, &mut rng);
            let v = hermitian_with_norm(3, 1.0, &mut rng);
            let h = 1e-5;
            let am = a.matrix();
            let fd = (apply(f, &(am + &v * Complex64::from(h))) - apply(f, &(am - &v * Complex64::from(h))))
                * Complex64::from(1.0 / (2.0 * h));
            fre = fre.max(rel(&frechet_derivative(f, &a, &v).unwrap(), &fd));

            let h = 1e-2;
            let at = |t: f64| apply(f, &(am + &v * Complex64::from(t * h)));
            let stencils: [(usize, &[(f64, f64)], f64); 3] = [
                (1, &[(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)], 12.0 * h),
                (2, &[(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)], 12.0 * h * h),
                (3, &[(-3.0, 1.0), (-2.0, -8.0), (-1.0, 13.0), (1.0, -13.0), (2.0, 8.0), (3.0, -1.0)], 8.0 * h * h * h),
            ];
            for (k, weights, denom) in stencils {
                let mut fd = matrix::zeros(3);
                for &(t, w) in weights {
                    fd += at(t) * Complex64::from(w / denom);
                }
                kth = kth.max(rel(&kth_derivative(f, &a, &v, k).unwrap(), &fd));
            }
        }
        for k in 1..=3 {
            let (x, b) = (0.37 + 0.1 * fi as f64, -1.3);
            let a = HermitianOperator::from_real_diagonal(&[x]);
            let got = kth_derivative(f, &a, &matrix::diag_real(&[b]), k).unwrap()[(0, 0)];
            let want = f.derivative(k, x).unwrap() * b.powi(k as i32);
            scalar = scalar.max((got - Complex64::from(want)).norm());
        }
    }
    outcome(
        fre <= 1e-6 && kth <= 1e-4 && scalar <= 1e-10,
        format!("Fréchet rel {fre:.1e} (1e-6), k≤3 rel {kth:.1e} (1e-4), scalar {scalar:.1e} (1e-10)"),
    )
}

// 7. remainder representations
fn criterion_7() -> Outcome {
    let mut rng = rng_from_seed(707);
    let (mut sa, mut un, mut low) = (0.0_f64, 0.0_f64, 0.0_f64);
    for inst in 0..60 {
        let slots = 1 + inst % 3;
        let k = 1 + inst % 3;
        let phis: Vec<ScalarFunction> = (0..slots)
            .map(|_| {
                let mut c: Vec<f64> = (0..=6).map(|_| rng.random_range(-1.0..1.0)).collect();
                c.truncate(rng.random_range(1..=7));
                ScalarFunction::polynomial(c)
            })
            .collect();
        let f = SeparableMultivariateFunction::per_slot(phis).unwrap();
        let xs: Vec<HermitianOperator> = (0..slots).map(|_| random_hermitian(3, &mut rng)).collect();
        let hs: Vec<HermitianOperator> = (0..slots)
            .map(|_| HermitianOperator::new(hermitian_with_norm(3, 0.5, &mut rng)).unwrap())
            .collect();
        let d = sa_remainder(&f, &xs, &hs, k, RemainderMethod::Direct).unwrap();
        let m = sa_remainder(&f, &xs, &hs, k, RemainderMethod::Moi).unwrap();
        sa = sa.max(operator_norm(&(d - m)));

        let ku = 1 + inst % 2;
        let phis: Vec<ScalarFunction> = (0..slots)
            .map(|_| ScalarFunction::polynomial((0..=4).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let f = SeparableMultivariateFunction::per_slot(phis).unwrap();
        let us: Vec<_> = (0..slots).map(|_| sample_haar_unitary(3, &mut rng).unwrap()).collect();
        let d = unitary_remainder(&f, &us, &hs, ku, RemainderMethod::Direct).unwrap();
        let m = unitary_remainder(&f, &us, &hs, ku, RemainderMethod::Moi).unwrap();
        un = un.max(operator_norm(&(d - m)));

        // degree below the order
        let kl = 2 + inst % 2;
        let phis: Vec<ScalarFunction> = (0..slots)
            .map(|_| ScalarFunction::polynomial((0..kl).map(|_| rng.random_range(-1.0..1.0)).collect()))
            .collect();
        let f = SeparableMultivariateFunction::per_slot(phis).unwrap();
        // e^{ιH} is not polynomial in H, so only constants vanish in the unitary case
        let constants = SeparableMultivariateFunction::per_slot(
            (0..slots).map(|_| ScalarFunction::polynomial(vec![rng.random_range(-1.0..1.0)])).collect(),
        )
        .unwrap();
        for method in [RemainderMethod::Direct, RemainderMethod::Moi] {
            low = low.max(operator_norm(&sa_remainder(&f, &xs, &hs, kl, method).unwrap()));
            low = low.max(operator_norm(&unitary_remainder(&constants, &us, &hs, kl, method).unwrap()));
        }
    }
    outcome(
        sa <= 1e-8 && un <= 1e-6 && low <= 1e-10,
        format!("self-adjoint {sa:.1e} (1e-8), unitary {un:.1e} (1e-6), vanishing cases {low:.1e} (1e-10)"),
    )
}

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/tailbound")
}

fn load_config(id: TheoremId) -> TailBoundExperiment {
    let text = std::fs::read_to_string(config_dir().join(format!("{}.json", id.name()))).unwrap();
    from_json(&text).unwrap()
}

// 8. shipped tail-bound configs
fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut rows = 0;
    for id in TheoremId::ALL {
        let exp = load_config(id);
        if exp.samples != 10_000 || exp.theta_grid.len() != 8 {
            failed.push(format!("{} (shape)", id.name()));
            continue;
        }
        match run_tail_bound(&exp) {
            Ok(rep) => {
                rows += rep.rows.len();
                if !rep.all_satisfied {
                    failed.push(id.name().to_string());
                }
            }
            Err(e) => failed.push(format!("{} ({e})", id.name())),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failed.is_empty() && secs <= 300.0,
        format!("7 configs, {rows} rows, failures {failed:?}; {secs:.1}s"),
    )
}

// 9. Haar sampler
fn criterion_9() -> Outcome {
    let mut rng = rng_from_seed(909);
    let n = 10_000;
    let mut dev = 0.0_f64;
    let mut trace2 = 0.0;
    let mut phases = Vec::with_capacity(n);
    for _ in 0..n {
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        dev = dev.max(unitarity_deviation(u.matrix()));
        trace2 += u.matrix().trace().norm_sqr();
        // one eigenphase per sample, chosen independently of the ordering
        let i = rng.random_range(0..4);
        phases.push(principal_phase(u.spectral().unwrap().eigenvalues()[i]));
    }
    let mean = trace2 / n as f64;
    let pi = std::f64::consts::PI;
    let d = ks_statistic(&phases, |x| ((x + pi) / (2.0 * pi)).clamp(0.0, 1.0));
    let p = ks_pvalue(d, n);
    outcome(
        dev <= 1e-10 && (0.95..=1.05).contains(&mean) && p > 0.01,
        format!("max |U*U − I| {dev:.1e}, E|tr U|² {mean:.4}, eigenphase KS p {p:.3}"),
    )
}

// 10. polynomial decomposition
fn criterion_10() -> Outcome {
    let mut rng = rng_from_seed(1010);
    let (mut res, mut prod) = (0.0_f64, 0.0_f64);
    let mut counts_ok = true;
    for inst in 0..60 {
        let m = 1 + inst % 3;
        let deg = 1 + inst % 4;
        let mut map = std::collections::BTreeMap::new();
        for alpha in moikit::integrand::separable::weak_compositions(deg, m + 1) {
            if rng.random::<f64>() < 0.7 {
                map.insert(alpha[..m].to_vec(), rng.random_range(-2.0..2.0));
            }
        }
        map.insert([vec![deg], vec![0; m - 1]].concat(), 1.0);
        let p = MonomialPolynomial::from_map(m, map);
        let dec = decompose_inner_powers(&p, &mut rng).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            res = res.max((p.eval(&x) - dec.form.eval(&x)).abs());
        }
        res = res.max(dec.residual);
        for i in 0..=deg {
            counts_ok &= dec.form.count_of_degree(i) == direction_count(m, i);
        }
        let lp = to_linear_products(&dec.form).unwrap();
        for _ in 0..50 {
            let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            prod = prod.max((lp.eval(&x) - dec.form.eval(&x)).abs());
        }
    }
    outcome(
        res <= 1e-8 && counts_ok && prod <= 1e-10,
        format!("reconstruction {res:.1e} (1e-8), counts C(m+i−1,i): {counts_ok}, product vs power {prod:.1e} (1e-10)"),
    )
}

/// `Σ ψ(λ…) 𝒫_{1,i_1} ⋆_N 𝒳_1 ⋆_N ⋯ ⋆_N 𝒫_{m,i_m}` with `𝒫 = 𝒰 ∘ conj(𝒰)`.
fn mti_by_contraction(tensors: &[HermitianTensor], psi: &MultivariateFunction, args: &[Tensor]) -> Tensor {
    let modes = tensors[0].mode_dims().to_vec();
    let nm = modes.len();
    let mut shape = modes.clone();
    shape.extend_from_slice(&modes);
    let systems: Vec<_> = tensors.iter().map(|t| tensor_eigendecompose(t).unwrap()).collect();
    let projectors: Vec<Vec<Tensor>> = systems
        .iter()
        .map(|s| {
            s.eigentensors
                .iter()
                .map(|u| Tensor::from_fn(shape.clone(), |idx| u.get(&idx[..nm]) * u.get(&idx[nm..]).conj()))
                .collect()
        })
        .collect();
    let p = systems[0].eigenvalues.len();
    let m = tensors.len();
    let mut total = Tensor::zeros(shape.clone());
    let mut idx = vec![0usize; m];
    loop {
        let lambda: Vec<f64> = idx.iter().zip(&systems).map(|(&i, s)| s.eigenvalues[i]).collect();
        let w = psi.eval(&lambda).unwrap();
        let mut t = projectors[0][idx[0]].clone();
        for j in 1..m {
            t = star_k(&star_k(&t, &args[j - 1], nm).unwrap(), &projectors[j][idx[j]], nm).unwrap();
        }
        total = total.add(&t.scale(Complex64::from(w))).unwrap();
        let mut j = m;
        loop {
            if j == 0 {
                return total;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < p {
                break;
            }
            idx[j] = 0;
        }
    }
}

// 11. MTI against contraction sums and fold∘MOI∘unfold
fn criterion_11() -> Outcome {
    let mut rng = rng_from_seed(1111);
    let (mut worst_contract, mut worst_fold) = (0.0_f64, 0.0_f64);
    for modes in [vec![2, 2], vec![2, 3]] {
        let p: usize = modes.iter().product();
        for m in [2, 3] {
            for _ in 0..3 {
                let tensors: Vec<HermitianTensor> = (0..m)
                    .map(|_| moikit::tensor::fold(random_hermitian(p, &mut rng).matrix(), &modes).unwrap())
                    .collect();
                let args: Vec<Tensor> =
                    (0..m - 1).map(|_| fold_general(&random_matrix(p, &mut rng), &modes).unwrap()).collect();
                let psi = random_separable(m, &mut rng);
                let trefs: Vec<&HermitianTensor> = tensors.iter().collect();
                let arefs: Vec<&Tensor> = args.iter().collect();
                let got = mti_evaluate(&trefs, &psi, &arefs).unwrap();
                let contracted = mti_by_contraction(&tensors, &psi, &args);
                worst_contract = worst_contract.max(got.max_abs_diff(&contracted).unwrap());
                let ops: Vec<HermitianOperator> = tensors.iter().map(|t| t.unfold().unwrap()).collect();
                let mats: Vec<ComplexMatrix> = args.iter().map(|x| x.to_matrix(modes.len())).collect();
                let via = fold_general(&evaluate_spectral(&spectra(&ops), &psi, &mats).unwrap(), &modes).unwrap();
                worst_fold = worst_fold.max(got.max_abs_diff(&via).unwrap());
            }
        }
    }
    outcome(
        worst_contract <= 1e-10 && worst_fold <= 1e-10,
        format!("vs ⋆_N contraction {worst_contract:.1e}, vs fold∘MOI∘unfold {worst_fold:.1e} (tol 1e-10)"),
    )
}

// 12. determinism
fn criterion_12() -> Outcome {
    let exp = load_config(TheoremId::HigherDifference);
    let a = to_json(&run_tail_bound_with_workers(&exp, 2).unwrap()).unwrap();
    let b = to_json(&run_tail_bound_with_workers(&exp, 2).unwrap()).unwrap();
    let r1 = run_tail_bound_with_workers(&exp, 1).unwrap();
    let r4 = run_tail_bound_with_workers(&exp, 4).unwrap();
    let mut diff = 0.0_f64;
    for (x, y) in r1.rows.iter().zip(&r4.rows) {
        diff = diff
            .max((x.empirical_prob - y.empirical_prob).abs())
            .max((x.bound_rhs - y.bound_rhs).abs())
            .max((x.mc_stderr - y.mc_stderr).abs());
    }
    for (x, y) in r1.expectation_estimates.iter().zip(&r4.expectation_estimates) {
        diff = diff.max((x.mean - y.mean).abs()).max((x.stderr - y.stderr).abs());
    }
    outcome(
        a == b && diff <= 1e-12,
        format!("same workers byte-identical: {}; 1 vs 4 workers max difference {diff:.1e}", a == b),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("MOI identity suite", criterion_1),
        ("rotated basis vs projector sums", criterion_2),
        ("perturbation formula", criterion_3),
        ("continuity estimate", criterion_4),
        ("norm bounds", criterion_5),
        ("derivatives", criterion_6),
        ("remainders", criterion_7),
        ("tail bounds", criterion_8),
        ("Haar sampler", criterion_9),
        ("polynomial decomposition", criterion_10),
        ("MTI", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failures = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.pass {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
