use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use nmtele::dephasing::{
    dephase_pair, dephase_single, local_decoherence, nonlocal_decoherence, DecoherenceValue,
};
use nmtele::nonmarkov::{detect_revival, distance_trace};
use nmtele::protocol::{teleport, teleport_mixed_input, Correction, ProtocolRun, QubitInput};
use nmtele::qstate::{
    apply_unitary, fidelity, purity, trace_distance, BellOutcome, Density2, Density4, Mat2, Mat4,
    PureQubit,
};
use nmtele::spectrum::{GaussianSpectrum, JointSpectrum, PhysicalParams};
use nmtele::tomography::reconstruct_frequencies;

const DN: f64 = 0.00889;
/// Alice's maximum interaction time, fs.
const T_MAX: f64 = 72_033.635_373_922_8;

fn lab(k: f64) -> GaussianSpectrum {
    GaussianSpectrum::from_physical(&PhysicalParams::default(), k).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bloch_ball() -> impl Strategy<Value = [f64; 3]> {
    (0.0..=1.0f64, 0.0..=PI, 0.0..2.0 * PI).prop_map(|(r, th, ph)| {
        let r = r.cbrt();
        [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
    })
}

fn density2() -> impl Strategy<Value = Density2> {
    bloch_ball().prop_map(|r| Density2::from_bloch(r).unwrap())
}

fn pure() -> impl Strategy<Value = PureQubit> {
    (0.0..=PI, 0.0..2.0 * PI).prop_map(|(th, ph)| PureQubit::from_angles(th, ph))
}

fn kappa() -> impl Strategy<Value = DecoherenceValue> {
    (0.0..=1.0f64, -PI..PI).prop_map(|(r, ph)| DecoherenceValue::new(Complex64::from_polar(r, ph)).unwrap())
}

fn unitary() -> impl Strategy<Value = Mat2> {
    (0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI, 0.0..2.0 * PI).prop_map(|(a, b, g, d)| {
        let e = |x: f64| Complex64::from_polar(1.0, x);
        let (cs, sn) = ((g / 2.0).cos(), (g / 2.0).sin());
        [
            [e(a - b / 2.0 - d / 2.0) * cs, -e(a - b / 2.0 + d / 2.0) * sn],
            [e(a + b / 2.0 - d / 2.0) * sn, e(a + b / 2.0 + d / 2.0) * cs],
        ]
    })
}

/// `A A† / tr(A A†)` for a random complex 4×4 `A`.
fn density4() -> impl Strategy<Value = Density4> {
    prop::collection::vec(-1.0..1.0f64, 32).prop_map(|xs| {
        let a: Vec<Complex64> = xs.chunks(2).map(|p| c(p[0], p[1])).collect();
        let mut m: Mat4 = [[c(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (0..4).map(|k| a[i * 4 + k] * a[j * 4 + k].conj()).sum();
            }
        }
        let tr: f64 = (0..4).map(|i| m[i][i].re).sum();
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x /= tr;
            }
        }
        for i in 0..4 {
            m[i][i].im = 0.0;
            for j in 0..i {
                m[i][j] = m[j][i].conj();
            }
        }
        Density4::new(m).unwrap()
    })
}

fn outcome() -> impl Strategy<Value = BellOutcome> {
    prop::sample::select(BellOutcome::ALL.to_vec())
}

fn max_abs_diff(a: &Density2, b: &Density2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a.get(i, j) - b.get(i, j)).norm());
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fidelity_is_symmetric_and_bounded(a in density2(), b in density2()) {
        let f = fidelity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - fidelity(&b, &a)).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn constructors_reject_broken_states(r in bloch_ball(), eps in 1e-6..0.5f64) {
        let m = *Density2::from_bloch(r).unwrap().matrix();
        let mut bad_trace = m;
        bad_trace[0][0] += eps;
        prop_assert!(Density2::new(bad_trace).is_err());
        let mut not_hermitian = m;
        not_hermitian[0][1] += c(0.0, eps);
        prop_assert!(Density2::new(not_hermitian).is_err());
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = (1.0 + eps) / norm.max(1e-3);
        prop_assert!(Density2::from_bloch(r.map(|x| x * scale)).is_err() || norm < 1e-3);
    }

    #[test]
    fn pure_fidelity_is_expectation(psi in pure(), b in density2()) {
        let [al, be] = psi.amplitudes();
        let m = b.matrix();
        let expect = (al.conj() * m[0][0] * al + al.conj() * m[0][1] * be
            + be.conj() * m[1][0] * al + be.conj() * m[1][1] * be).re;
        prop_assert!((fidelity(&psi.projector(), &b) - expect).abs() <= 1e-10);
    }

    #[test]
    fn fuchs_van_de_graaf(a in density2(), b in density2()) {
        let f = fidelity(&a, &b);
        let d = trace_distance(&a, &b);
        prop_assert!(1.0 - f.sqrt() <= d + 1e-10);
        prop_assert!(d <= (1.0 - f).sqrt() + 1e-10);
    }

    #[test]
    fn trace_distance_triangle(a in density2(), b in density2(), x in density2()) {
        prop_assert!(trace_distance(&a, &b) <= trace_distance(&a, &x) + trace_distance(&x, &b) + 1e-12);
    }

    #[test]
    fn unitaries_preserve_purity(u in unitary(), rho in density2()) {
        let out = apply_unitary(&u, &rho).unwrap();
        prop_assert!((purity(&out) - purity(&rho)).abs() <= 1e-12);
    }

    #[test]
    fn single_dephasing_is_valid_and_multiplicative(rho in density2(), k1 in kappa(), k2 in kappa()) {
        let once = dephase_single(&rho, k1);
        prop_assert!(Density2::new(*once.matrix()).is_ok());
        let twice = dephase_single(&once, k2);
        let direct = dephase_single(&rho, k1 * k2);
        prop_assert!(max_abs_diff(&twice, &direct) <= 1e-12);
    }

    #[test]
    fn pair_dephasing_stays_physical(rho in density4(), k in kappa()) {
        let out = dephase_pair(&rho, k);
        prop_assert!(Density4::new(*out.matrix()).is_ok());
        for i in 0..4 {
            prop_assert_eq!(out.get(i, i), rho.get(i, i));
        }
    }

    #[test]
    fn characteristic_bounded_and_conjugate_symmetric(
        omega0 in 0.1..10.0f64,
        c11 in 1e-8..1e-2f64,
        c22 in 1e-8..1e-2f64,
        k in -1.0..=1.0f64,
        u in -2000.0..2000.0f64,
        v in -2000.0..2000.0f64,
    ) {
        let s = GaussianSpectrum::new(omega0, c11, c22, k).unwrap();
        let z = s.characteristic(u, v);
        prop_assert!(z.norm() <= 1.0 + 1e-15);
        let w = s.characteristic(-u, -v);
        prop_assert!((z.conj() - w).norm() <= 1e-12);
    }

    #[test]
    fn uncorrelated_kappa_factorizes(t_a in 0.0..T_MAX, t_b in 0.0..T_MAX, sign in prop::sample::select(vec![-1.0, 1.0])) {
        let s = lab(0.0);
        let dn = sign * DN;
        let joint = nonlocal_decoherence(&s, dn, t_a, t_b).unwrap().value();
        let a = local_decoherence(&s, dn, t_a).unwrap().value();
        let b = s.characteristic(0.0, dn * t_b);
        prop_assert!((joint - a * b).norm() <= 1e-12);
    }

    #[test]
    fn perfect_anticorrelation_keeps_unit_kappa(t in 0.0..3.0 * T_MAX) {
        let s = lab(-1.0);
        prop_assert!((nonlocal_decoherence(&s, DN, t, t).unwrap().magnitude() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn noiseless_round_trip(psi in pure(), o in outcome()) {
        let s = lab(-0.5);
        let run = ProtocolRun::new(QubitInput::Pure(psi), &s, DN, 0.0, 0.0, o);
        let out = teleport(&run).unwrap();
        prop_assert!((fidelity(&out, &psi.projector()) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn recovery_identity(psi in pure(), o in outcome(), t in 0.0..T_MAX) {
        let s = lab(-1.0);
        let run = ProtocolRun::new(QubitInput::Pure(psi), &s, DN, t, t, o);
        let out = teleport(&run).unwrap();
        prop_assert!(max_abs_diff(&out, &psi.projector()) <= 1e-9, "{}", max_abs_diff(&out, &psi.projector()));
    }

    #[test]
    fn outcome_probabilities_are_quarter(rho in density2(), o in outcome(), t_a in 0.0..T_MAX, t_b in 0.0..T_MAX, k in -1.0..=1.0f64) {
        let s = lab(k);
        let run = ProtocolRun::new(QubitInput::Mixed(rho), &s, DN, t_a, t_b, o);
        prop_assert!((run.outcome_probability().unwrap() - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn teleport_is_linear(a in density2(), b in density2(), lambda in 0.0..=1.0f64, o in outcome(),
                          t_a in 0.0..T_MAX, t_b in 0.0..T_MAX, k in -1.0..=0.0f64) {
        let s = lab(k);
        let run = ProtocolRun::new(QubitInput::Mixed(a), &s, DN, t_a, t_b, o);
        let mix = Density2::from_bloch({
            let (ra, rb) = (a.bloch(), b.bloch());
            [0, 1, 2].map(|i| lambda * ra[i] + (1.0 - lambda) * rb[i])
        }).unwrap();
        let out_a = teleport_mixed_input(&a, &run).unwrap();
        let out_b = teleport_mixed_input(&b, &run).unwrap();
        let out_mix = teleport_mixed_input(&mix, &run).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let lin = out_a.get(i, j) * lambda + out_b.get(i, j) * (1.0 - lambda);
                prop_assert!((out_mix.get(i, j) - lin).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn pure_and_mixed_inputs_agree(psi in pure(), o in outcome(), t_a in 0.0..T_MAX, t_b in 0.0..T_MAX) {
        let s = lab(-0.9);
        let run = ProtocolRun::new(QubitInput::Pure(psi), &s, DN, t_a, t_b, o);
        let a = teleport(&run).unwrap();
        let b = teleport_mixed_input(&psi.projector(), &run).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-12);
    }

    #[test]
    fn wrong_sign_breaks_recovery(t in 1000.0..T_MAX, o in prop::sample::select(vec![BellOutcome::PsiPlus, BellOutcome::PsiMinus])) {
        let s = lab(-1.0);
        let psi = PureQubit::from_angles(PI / 2.0, 0.3);
        let run = ProtocolRun::new(QubitInput::Pure(psi), &s, DN, t, t, o);
        prop_assert!((fidelity(&teleport(&run).unwrap(), &psi.projector()) - 1.0).abs() <= 1e-9);
        let broken = run.with_correction(Correction { sign: 1, ..run.correction });
        prop_assert!(fidelity(&teleport(&broken).unwrap(), &psi.projector()) < 1.0 - 1e-9);
    }

    #[test]
    fn tomography_round_trip(r in bloch_ball()) {
        let rho = Density2::from_bloch(r).unwrap();
        let p = [0, 1, 2].map(|i| (1.0 + r[i]) / 2.0);
        let res = reconstruct_frequencies(p).unwrap();
        prop_assert!(max_abs_diff(&res.rho_hat, &rho) <= 1e-12);
    }

    #[test]
    fn projection_never_grows_bloch(p in prop::array::uniform3(0.0..=1.0f64)) {
        let raw: f64 = p.iter().map(|x| (2.0 * x - 1.0f64).powi(2)).sum::<f64>().sqrt();
        let res = reconstruct_frequencies(p).unwrap();
        let out = res.bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(out <= raw + 1e-15 && out <= 1.0 + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn alice_noise_degrades_equatorial_inputs(phi in 0.0..2.0 * PI, k in -0.999..=0.0f64, o in outcome()) {
        let s = lab(k);
        let psi = PureQubit::from_angles(PI / 2.0, phi);
        let mut prev = 1.0 + 1e-12;
        for i in 0..=40 {
            let t = T_MAX * 1.5 * i as f64 / 40.0;
            let run = ProtocolRun::new(QubitInput::Pure(psi), &s, DN, t, 0.0, o);
            let f = fidelity(&teleport(&run).unwrap(), &psi.projector());
            prop_assert!(f <= prev + 1e-12, "t={t}: {f} > {prev}");
            prev = f;
        }
    }

    #[test]
    fn trace_matches_nonlocal_kappa(k in -1.0..=1.0f64, n in 2usize..40) {
        let s = lab(k);
        let tr = distance_trace(&s, DN, T_MAX, T_MAX, n).unwrap();
        for (i, (&t, &d)) in tr.times.iter().zip(&tr.distances).enumerate() {
            let expect = if i <= tr.segment_boundary {
                local_decoherence(&s, DN, t).unwrap().magnitude()
            } else {
                nonlocal_decoherence(&s, DN, T_MAX, t - T_MAX).unwrap().magnitude()
            };
            prop_assert!((d - expect).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}

#[test]
fn revival_grows_as_correlation_strengthens() {
    let mut prev = -1.0;
    for i in 0..=20 {
        let k = -(i as f64) / 20.0;
        let rev = detect_revival(&distance_trace(&lab(k), DN, T_MAX, T_MAX, 60).unwrap());
        assert!(rev.magnitude >= prev, "k={k}: {} < {prev}", rev.magnitude);
        prev = rev.magnitude;
    }
}

#[test]
fn uncorrelated_never_revives() {
    for scale in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let rev = detect_revival(&distance_trace(&lab(0.0), DN, T_MAX * scale, T_MAX * scale, 80).unwrap());
        assert_eq!(rev.magnitude, 0.0);
        assert!(!rev.is_non_markovian);
    }
}

#[test]
fn maximally_mixed_input_is_fixed() {
    let s = lab(-0.7);
    for o in BellOutcome::ALL {
        let run = ProtocolRun::new(QubitInput::Mixed(Density2::maximally_mixed()), &s, DN, T_MAX, 0.3 * T_MAX, o);
        let out = teleport(&run).unwrap();
        assert_abs_diff_eq!(max_abs_diff(&out, &Density2::maximally_mixed()), 0.0, epsilon = 1e-15);
    }
}
