//! The `verify` subcommand: a named battery of invariant checks over every
//! module, run at fixed seeds. Each check reports pass/fail with a one-line
//! numeric detail; the process exits nonzero if any check fails.

use serde::Serialize;

use gibbslab::circuit::{self, Circuit, Gate};
use gibbslab::dense::{self, DensityMatrix};
use gibbslab::distill;
use gibbslab::hamiltonian;
use gibbslab::lindblad;
use gibbslab::linalg::{self, cr, CMat, CVec};
use gibbslab::markov::{self, Lattice, Tripartition};
use gibbslab::noise::{self, NoiseSpec};
use gibbslab::pauli::{pauli_set_on, PauliString};
use gibbslab::repcode;
use gibbslab::superop::{cptp_check, Superoperator};

#[derive(Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub version: &'static str,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

struct Battery {
    checks: Vec<CheckResult>,
}

impl Battery {
    fn run(
        &mut self,
        name: &'static str,
        f: impl FnOnce() -> Result<(bool, String), gibbslab::Error>,
    ) {
        let (pass, detail) = match f() {
            Ok((pass, detail)) => (pass, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        self.checks.push(CheckResult { name, pass, detail });
    }
}

fn random_state(n: usize, seed: u64) -> DensityMatrix {
    dense::random_density(n, seed)
}

fn cnot_generator(beta: f64) -> Result<lindblad::DaviesGenerator, gibbslab::Error> {
    let mut c = Circuit::new(2);
    c.push_gate(Gate::Cnot(0, 1))?;
    let hp = hamiltonian::build_parent(&c)?;
    lindblad::build_davies(&hp, beta)
}

pub fn run_verify(inject_weight_sign_bug: bool) -> VerifyReport {
    let mut b = Battery { checks: Vec::new() };

    // --- core primitives -------------------------------------------------
    b.run("pauli_product_table_n2", || {
        let mut worst = 0.0f64;
        for p in pauli_set_on(2, &[0, 1]) {
            for q in pauli_set_on(2, &[0, 1]) {
                let d = linalg::max_abs(&(p.to_matrix() * q.to_matrix() - p.mul(&q).to_matrix()));
                worst = worst.max(d);
            }
        }
        Ok((worst < 1e-13, format!("max product residual {worst:.2e}")))
    });
    b.run("pauli_unitarity_n3", || {
        let mut worst = 0.0f64;
        for p in pauli_set_on(3, &[0, 1, 2]).into_iter().step_by(9) {
            let m = p.to_matrix();
            worst = worst.max(linalg::max_abs(&(&m * m.adjoint() - linalg::identity(8))));
        }
        Ok((worst < 1e-13, format!("max unitarity residual {worst:.2e}")))
    });
    b.run("partial_trace_bell", || {
        let mut psi = CVec::zeros(4);
        psi[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        psi[3] = cr(std::f64::consts::FRAC_1_SQRT_2);
        let rho = DensityMatrix::from_pure(&psi)?;
        let red = dense::partial_trace(&rho, &[0])?;
        let d = linalg::max_abs(&(red.matrix() - DensityMatrix::maximally_mixed(1).matrix()));
        Ok((d < 1e-12, format!("deviation from I/2: {d:.2e}")))
    });
    b.run("partial_trace_order_independence", || {
        let rho = random_state(3, 1);
        let a = dense::partial_trace(&dense::partial_trace(&rho, &[0, 2])?, &[1])?;
        let bmat = dense::partial_trace(&rho, &[2])?;
        let d = linalg::max_abs(&(a.matrix() - bmat.matrix()));
        Ok((d < 1e-12, format!("composition mismatch {d:.2e}")))
    });
    b.run("divergences_identical_and_orthogonal", || {
        let rho = random_state(2, 2);
        let same = dense::divergences(&rho, &rho)?;
        let zero = DensityMatrix::basis_state(1, 0);
        let one = DensityMatrix::basis_state(1, 1);
        let orth = dense::divergences(&zero, &one)?;
        let ok = same.trace_distance < 1e-12
            && same.relative_entropy.abs() < 1e-9
            && (same.fidelity - 1.0).abs() < 1e-9
            && (orth.trace_distance - 1.0).abs() < 1e-12
            && orth.relative_entropy.is_infinite();
        Ok((ok, format!("TD(ρ,ρ)={:.2e}", same.trace_distance)))
    });
    b.run("pinsker_inequality", || {
        let mut ok = true;
        let mut worst = f64::NEG_INFINITY;
        for seed in 0..20 {
            let a = random_state(2, 100 + seed);
            let bstate = random_state(2, 200 + seed);
            let d = dense::divergences(&a, &bstate)?;
            let slack = (d.relative_entropy / 2.0).sqrt() - d.trace_distance;
            worst = worst.max(-slack);
            ok &= slack > -1e-10;
        }
        Ok((ok, format!("worst Pinsker violation {worst:.2e}")))
    });
    b.run("trace_distance_triangle", || {
        let mut ok = true;
        for seed in 0..15 {
            let a = random_state(2, 300 + seed);
            let bb = random_state(2, 400 + seed);
            let c = random_state(2, 500 + seed);
            let ab = dense::divergences(&a, &bb)?.trace_distance;
            let bc = dense::divergences(&bb, &c)?.trace_distance;
            let ac = dense::divergences(&a, &c)?.trace_distance;
            ok &= ac <= ab + bc + 1e-10;
        }
        Ok((ok, "20 random triples".into()))
    });
    b.run("cptp_identity_and_transpose", || {
        let id = cptp_check(&Superoperator::identity(1), 1e-10)?;
        let mut tmat = CMat::zeros(4, 4);
        tmat[(0, 0)] = cr(1.0);
        tmat[(3, 3)] = cr(1.0);
        tmat[(1, 2)] = cr(1.0);
        tmat[(2, 1)] = cr(1.0);
        let tp = cptp_check(&Superoperator::new(1, tmat), 1e-10)?;
        let ok = id.is_cp && id.is_tp && !tp.is_cp && (tp.min_choi_eig + 1.0).abs() < 1e-10;
        Ok((ok, format!("transpose min Choi eig {:.3}", tp.min_choi_eig)))
    });

    // --- circuit layer ----------------------------------------------------
    b.run("circuit_unitarity", || {
        let c = circuit::random_circuit(3, 3, 7);
        let u = circuit::build_unitary(&c)?;
        let d = linalg::max_abs(&(&u * u.adjoint() - linalg::identity(8)));
        Ok((d < 1e-10, format!("‖UU†−I‖ = {d:.2e}")))
    });
    b.run("adjoint_circuit_matches_dagger", || {
        let c = circuit::random_circuit(3, 4, 8);
        let u = circuit::build_unitary(&c)?;
        let ua = circuit::build_unitary(&c.adjoint())?;
        let d = linalg::max_abs(&(ua - u.adjoint()));
        Ok((d < 1e-10, format!("residual {d:.2e}")))
    });
    b.run("lightcone_contains_z_support", || {
        let mut ok = true;
        for seed in 0..8 {
            let c = circuit::random_circuit(5, 3, seed);
            let s = circuit::supports(&c)?;
            for i in 0..5 {
                ok &= s.z_support[i].is_subset(&s.lightcone[i]);
            }
        }
        Ok((ok, "8 random circuits".into()))
    });
    b.run("z_support_symbolic_vs_dense", || {
        let mut worst = true;
        for seed in [3u64, 17] {
            let c = circuit::random_circuit(5, 3, seed);
            let u = circuit::build_unitary(&c)?;
            let s = circuit::supports(&c)?;
            for i in 0..5 {
                let z = PauliString::single(5, i, 3).to_matrix();
                let conj = &u * z * u.adjoint();
                for q in 0..5 {
                    let xq = PauliString::single(5, q, 1).to_matrix();
                    let zq = PauliString::single(5, q, 3).to_matrix();
                    let acts = linalg::max_abs(&(&conj * &xq - &xq * &conj)) > 1e-10
                        || linalg::max_abs(&(&conj * &zq - &zq * &conj)) > 1e-10;
                    worst &= acts == s.z_support[i].contains(&q);
                }
            }
        }
        Ok((worst, "exact support agreement".into()))
    });
    b.run("iqp_cluster_distribution_normalized", || {
        let c = circuit::build_iqp_cluster(2, 2, &circuit::random_exponents(4, 7))?;
        let dist = circuit::output_distribution(&c)?;
        let total: f64 = dist.iter().sum();
        Ok(((total - 1.0).abs() < 1e-10, format!("Σp = {total:.12}")))
    });

    // --- parent Hamiltonian ------------------------------------------------
    b.run("parent_terms_are_commuting_projectors", || {
        let c = circuit::random_circuit(3, 3, 21);
        let hp = hamiltonian::build_parent(&c)?;
        let mut worst = 0.0f64;
        for i in 0..3 {
            let h = hp.term_embedded(i);
            worst = worst.max(linalg::max_abs(&(&h * &h - &h)));
            for j in 0..3 {
                let g = hp.term_embedded(j);
                worst = worst.max(linalg::max_abs(&(&h * &g - &g * &h)));
            }
        }
        Ok((worst < 1e-10, format!("max residual {worst:.2e}")))
    });
    b.run("parent_integer_spectrum", || {
        let c = circuit::build_iqp_cluster(2, 2, &circuit::random_exponents(4, 3))?;
        let hp = hamiltonian::build_parent(&c)?;
        let (vals, _) = linalg::eigh(&hp.dense_hamiltonian())?;
        let worst = vals
            .iter()
            .map(|v| (v - v.round()).abs())
            .fold(0.0, f64::max);
        Ok((worst < 1e-8, format!("max distance to integer {worst:.2e}")))
    });
    b.run("parent_affine_identity", || {
        let c = circuit::random_circuit(3, 2, 5);
        let hp = hamiltonian::build_parent(&c)?;
        let u = hp.unitary();
        let mut zsum = CMat::zeros(8, 8);
        for i in 0..3 {
            zsum += PauliString::single(3, i, 3).to_matrix();
        }
        let rhs = (linalg::identity(8).scale(3.0) - u * zsum * u.adjoint()).scale(0.5);
        let d = linalg::max_abs(&(hp.dense_hamiltonian() - rhs));
        Ok((d < 1e-10, format!("residual {d:.2e}")))
    });
    b.run("eigenprojector_resolution", || {
        let c = circuit::random_circuit(3, 3, 9);
        let hp = hamiltonian::build_parent(&c)?;
        let mut acc = CMat::zeros(8, 8);
        for k in 0..=3 {
            acc += hamiltonian::eigenprojector(&hp, k)?.scale(k as f64);
        }
        let d = linalg::max_abs(&(acc - hp.dense_hamiltonian()));
        Ok((d < 1e-10, format!("Σ kΠ_k − H: {d:.2e}")))
    });
    b.run("gibbs_partition_function_formula", || {
        let c = circuit::random_circuit(3, 2, 12);
        let hp = hamiltonian::build_parent(&c)?;
        let beta = 1.3;
        let (_, z) = hamiltonian::gibbs_state(&hp, beta)?;
        let want = hamiltonian::partition_function_formula(3, beta);
        let d = (z - want).abs();
        Ok((d < 1e-10 * want, format!("|Z − (1+e^{{−β}})^n| = {d:.2e}")))
    });
    b.run("coloring_valid_and_within_bound", || {
        let mut ok = true;
        let mut max_used = 0usize;
        for seed in 0..10 {
            let c = circuit::random_circuit(6, 3, seed);
            let hp = hamiltonian::build_parent(&c)?;
            let colors = hamiltonian::color_interactions(&hp);
            for i in 0..6 {
                for j in (i + 1)..6 {
                    if colors[i] == colors[j] {
                        ok &= !hp.terms()[i]
                            .support
                            .iter()
                            .any(|q| hp.terms()[j].support.contains(q));
                    }
                }
            }
            let used = colors.iter().max().unwrap() + 1;
            max_used = max_used.max(used);
            ok &= used <= hp.ell() * (1 << c.depth()) + 1;
        }
        Ok((ok, format!("max colors used {max_used}")))
    });

    // --- Davies generators -------------------------------------------------
    b.run("glauber_weight_ratio", || {
        let mut worst = 0.0f64;
        for nu in [-3.0f64, -1.0, 1.0, 2.0, 3.0] {
            for beta in [0.5, 1.0, 2.0] {
                let r = lindblad::glauber_weight(nu, beta) / lindblad::glauber_weight(-nu, beta);
                worst = worst.max((r - (-beta * nu).exp()).abs());
            }
        }
        Ok((worst < 1e-12, format!("worst ratio error {worst:.2e}")))
    });
    b.run("davies_fixed_point", || {
        let gen = cnot_generator(1.0)?;
        let d = linalg::max_abs(&gen.superop().apply(gen.rho_beta().matrix()));
        Ok((d < 1e-9, format!("‖L[ρ_β]‖ = {d:.2e}")))
    });
    b.run("detailed_balance", || {
        let weight: &dyn Fn(f64, f64) -> f64 = if inject_weight_sign_bug {
            &|nu, beta| 1.0 / (1.0 + (-beta * nu).exp())
        } else {
            &lindblad::glauber_weight
        };
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1))?;
        let hp = hamiltonian::build_parent(&c)?;
        let gen = lindblad::build_davies_with_weight(&hp, 1.0, weight)?;
        let rep = lindblad::detailed_balance_check(&gen, 0.5)?;
        Ok((
            rep.pair_residual < 1e-9,
            format!("pair residual {:.2e}", rep.pair_residual),
        ))
    });
    b.run("detailed_balance_negative_control", || {
        // the wrong weight sign must be loudly detected
        let mut c = Circuit::new(2);
        c.push_gate(Gate::Cnot(0, 1))?;
        let hp = hamiltonian::build_parent(&c)?;
        let gen =
            lindblad::build_davies_with_weight(&hp, 1.0, &|nu, beta| {
                1.0 / (1.0 + (-beta * nu).exp())
            })?;
        let rep = lindblad::detailed_balance_check(&gen, 0.5)?;
        Ok((
            rep.pair_residual > 1e-3,
            format!("wrong-sign residual {:.2e}", rep.pair_residual),
        ))
    });
    b.run("discriminant_s_independent", || {
        let gen = cnot_generator(0.7)?;
        let k0 = lindblad::discriminant(&gen, 0.0)?;
        let kh = lindblad::discriminant(&gen, 0.5)?;
        let k1 = lindblad::discriminant(&gen, 1.0)?;
        let d = linalg::max_abs(&(&k0.matrix - &kh.matrix))
            .max(linalg::max_abs(&(&k1.matrix - &kh.matrix)));
        Ok((d < 1e-9, format!("max s-dependence {d:.2e}")))
    });
    b.run("single_qubit_gap_half", || {
        let mut worst = 0.0f64;
        for beta in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let hp = hamiltonian::build_parent(&Circuit::new(1))?;
            let gen = lindblad::build_davies(&hp, beta)?;
            let disc = lindblad::discriminant(&gen, 0.5)?;
            worst = worst.max((disc.gap - 0.5).abs());
        }
        Ok((worst < 1e-12, format!("max |gap − ½| = {worst:.2e}")))
    });
    b.run("single_qubit_kernel_purified_gibbs", || {
        let beta = 2.0;
        let hp = hamiltonian::build_parent(&Circuit::new(1))?;
        let gen = lindblad::build_davies(&hp, beta)?;
        let disc = lindblad::discriminant(&gen, 0.5)?;
        let mut target = CVec::zeros(4);
        target[0] = cr(1.0);
        target[3] = cr((-beta / 2.0).exp());
        let target = target.scale(1.0 / target.norm());
        let overlap = (disc.kernel.adjoint() * &target)[(0, 0)].norm();
        Ok((
            (overlap - 1.0).abs() < 1e-10,
            format!("kernel overlap {overlap:.12}"),
        ))
    });
    b.run("lindbladian_spectrum_real", || {
        let gen = cnot_generator(1.3)?;
        let ev = linalg::eigenvalues(gen.superop().matrix())?;
        let worst = ev.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
        Ok((worst < 1e-8, format!("max |Im λ| = {worst:.2e}")))
    });
    b.run("evolution_trace_preserving", || {
        let gen = cnot_generator(1.0)?;
        let rho = random_state(2, 31);
        let out = lindblad::evolve(&gen, &rho, 1.7)?;
        let d = (out.matrix().trace().re - 1.0).abs();
        Ok((d < 1e-10, format!("trace drift {d:.2e}")))
    });
    b.run("evolution_converges_to_gibbs", || {
        let gen = cnot_generator(1.0)?;
        let rho = DensityMatrix::basis_state(2, 3);
        let disc = lindblad::discriminant(&gen, 0.5)?;
        let late = lindblad::evolve(&gen, &rho, 200.0 / disc.gap)?;
        let td = dense::divergences(&late, gen.rho_beta())?.trace_distance;
        Ok((td < 1e-6, format!("TD to ρ_β {td:.2e}")))
    });
    b.run("entropy_curve_monotone", || {
        let gen = cnot_generator(1.0)?;
        let grid: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
        let rep = lindblad::mixing_diagnostics(&gen, &grid)?;
        let mono = rep
            .entropy_curve
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + 1e-9);
        Ok((mono, format!("fitted rate {:.4}", rep.fitted_rate)))
    });
    b.run("mixing_time_within_gap_bound", || {
        let hp = hamiltonian::build_parent(&Circuit::new(2))?;
        let gen = lindblad::build_davies(&hp, 1.0)?;
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let rep = lindblad::mixing_diagnostics(&gen, &grid)?;
        let disc = lindblad::discriminant(&gen, 0.5)?;
        let min_eig = gen.rho_beta().eigenvalues()?[0];
        let bound = (2.0 / min_eig.sqrt()).ln() / disc.gap + 0.5;
        let t = rep.halving_time.unwrap_or(f64::INFINITY);
        Ok((t <= bound, format!("t_half {t:.2} ≤ {bound:.2}")))
    });
    b.run("entropy_production_mlsi", || {
        let gen = cnot_generator(1.0)?;
        let alpha = 0.25 / (16.0 * (1.0 + 1.0f64.exp()));
        let mut ok = true;
        let mut tightest = f64::INFINITY;
        for seed in 0..40 {
            let rho = random_state(2, 600 + seed);
            let ep = lindblad::entropy_production(&gen, &rho)?;
            let d = lindblad::relative_entropy_to_fixed_point(&gen, &rho)?;
            ok &= ep <= 1e-12 && ep <= -alpha * d + 1e-9;
            tightest = tightest.min(-ep / d / alpha);
        }
        Ok((ok, format!("min (rate/α) = {tightest:.1}")))
    });
    b.run("convex_decomposition_identity", || {
        let gen = cnot_generator(1.0)?;
        let rep = lindblad::convex_decomposition(&gen)?;
        let ok = (rep.q - 0.25).abs() < 1e-15 && rep.identity_residual < 1e-8;
        Ok((ok, format!("residual {:.2e}", rep.identity_residual)))
    });
    b.run("convex_rest_generator_valid", || {
        let gen = cnot_generator(1.0)?;
        let rep = lindblad::convex_decomposition(&gen)?;
        let ok = rep.rest_fixed_point_residual < 1e-9
            && rep.rest_cptp.is_cp
            && rep.rest_cptp.is_tp;
        Ok((
            ok,
            format!(
                "‖L_rest[σ]‖ {:.2e}, min Choi {:.2e}",
                rep.rest_fixed_point_residual, rep.rest_cptp.min_choi_eig
            ),
        ))
    });
    b.run("oft_reconstruction", || {
        let c = circuit::random_circuit(3, 3, 4);
        let hp = hamiltonian::build_parent(&c)?;
        let gen = lindblad::build_davies(&hp, 1.0)?;
        let mut worst = 0.0f64;
        for a in (0..gen.jumps().len()).step_by(23) {
            worst = worst.max(lindblad::oft_check(&gen, a)?);
        }
        Ok((worst < 1e-10, format!("max reconstruction err {worst:.2e}")))
    });
    b.run("boltzmann_filter_truncation", || {
        let f = lindblad::boltzmann_filter(32, 1.0, 1e-6)?;
        let ortho = linalg::max_abs(&(f.w.adjoint() * &f.w - linalg::identity(f.w.nrows())));
        let ok = f.actual_norm_err <= f.paper_bound && ortho < 1e-12;
        Ok((
            ok,
            format!("err {:.2e} ≤ bound {:.2e}", f.actual_norm_err, f.paper_bound),
        ))
    });

    // --- noise ---------------------------------------------------------------
    b.run("beta_p_roundtrip", || {
        let beta = 1.7;
        let d = (noise::p_to_beta(noise::beta_to_p(beta)?)? - beta).abs();
        Ok((d < 1e-12, format!("roundtrip error {d:.2e}")))
    });
    b.run("gibbs_equals_noisy_circuit", || {
        let c = circuit::build_iqp_cluster(2, 2, &circuit::random_exponents(4, 7))?;
        let r = noise::gibbs_equivalence_check(&c, 1.0)?;
        Ok((r < 1e-10, format!("trace distance {r:.2e}")))
    });
    b.run("combined_noise_rate", || {
        let spec = NoiseSpec::new(0.1, 0.2)?;
        Ok((
            (spec.combined() - 0.26).abs() < 1e-15,
            format!("q = {}", spec.combined()),
        ))
    });
    b.run("noisy_sampler_matches_density_matrix", || {
        let c = circuit::build_iqp_cluster(2, 1, &circuit::random_exponents(2, 9))?;
        let p = 0.3;
        let samples = noise::noisy_iqp_samples(&c, NoiseSpec::new(p, 0.0)?, 77, 40_000)?;
        let rho = noise::noisy_output_state(&c, p)?;
        let mut worst = 0.0f64;
        for x in 0..4usize {
            let want = rho.matrix()[(x, x)].re;
            let got = samples
                .iter()
                .filter(|s| ((s[0] as usize) << 1 | s[1] as usize) == x)
                .count() as f64
                / samples.len() as f64;
            let sigma = (want * (1.0 - want) / samples.len() as f64).sqrt();
            worst = worst.max((got - want).abs() / sigma.max(1e-9));
        }
        Ok((worst < 4.0, format!("worst deviation {worst:.2}σ")))
    });

    // --- distillation ----------------------------------------------------------
    b.run("gadget_node_count", || {
        let ok = distill::build_gadget(3, 2)?.k() == 4
            && distill::build_gadget(3, 3)?.k() == 13
            && distill::build_gadget(2, 4)?.k() == 15;
        Ok((ok, "k = (B^D−1)/(B−1)".into()))
    });
    b.run("gadget_geometry_bounds", || {
        let mut ok = true;
        for (arity, levels) in [(3usize, 2usize), (3, 3), (5, 2)] {
            let g = distill::build_gadget(arity, levels)?;
            let sup = circuit::supports(&g.to_circuit()?)?;
            ok &= sup.ell <= arity * levels && sup.r == levels;
        }
        Ok((ok, "lightcone ≤ B·D, z-support = D".into()))
    });
    b.run("exact_failure_reference_values", || {
        let a = distill::exact_failure_rate(3, 2, 0.1)?;
        let bb = distill::exact_failure_rate(3, 3, 0.1)?;
        let ok = (a - 0.028).abs() < 1e-15 && (bb - 0.002308096).abs() < 1e-9;
        Ok((ok, format!("f={a:.6}, f²={bb:.7}")))
    });
    b.run("mc_failure_agrees_with_exact", || {
        let est = distill::mc_failure_rate(3, 2, 0.1, 50_000, 11)?;
        let exact = distill::exact_failure_rate(3, 2, 0.1)?;
        let dev = (est.rate - exact).abs() / est.stderr.max(1e-9);
        Ok((dev < 4.0, format!("{dev:.2}σ from exact")))
    });
    b.run("recursion_chain_inequality", || {
        let mut ok = true;
        for arity in [3usize, 5] {
            let mut p = 0.3;
            for _ in 0..3 {
                let next = distill::majority_failure(arity, p);
                if p <= 0.5 {
                    ok &= next <= 2f64.powi(arity as i32) * p.powf(arity as f64 / 2.0) + 1e-12;
                }
                p = next;
            }
        }
        Ok((ok, "p' ≤ 2^B p^{B/2}".into()))
    });
    b.run("ft_pipeline_small", || {
        let base = circuit::build_iqp_cluster(2, 1, &circuit::random_exponents(2, 3))?;
        let ft = distill::assemble_ft_circuit(&base, 3, 2)?;
        let rep = distill::ft_pipeline(&ft, 2.0, 4, 20_000)?;
        Ok((
            rep.tvd <= rep.failure_bound + 3.0 * rep.sampling_stderr,
            format!("tvd {:.4} ≤ {:.4}", rep.tvd, rep.failure_bound),
        ))
    });

    // --- repetition code ----------------------------------------------------
    b.run("repcode_encoding_identity", || {
        let c = circuit::build_iqp_cluster(2, 1, &circuit::random_exponents(2, 31))?;
        let p = repcode::iqp_to_program(&c)?;
        let enc = repcode::encode_program(&p, 3)?;
        let d = p.diagonal()?;
        let dt = enc.diagonal()?;
        let mut worst = 0.0f64;
        for x in 0..(1usize << 6) {
            let bits: Vec<u8> = (0..6).map(|i| ((x >> (5 - i)) & 1) as u8).collect();
            let folded = repcode::repetition_parity(&bits, 3);
            let fidx: usize = folded.iter().fold(0, |acc, &v| acc << 1 | v as usize);
            worst = worst.max((dt[x] - d[fidx]).norm());
        }
        Ok((worst < 1e-12, format!("max identity error {worst:.2e}")))
    });
    b.run("multiz_decomposition_exact", || {
        let mut worst = 0.0f64;
        for k in 2..=5usize {
            let c = repcode::decompose_multiz(k, 0.7)?;
            let u = circuit::build_unitary(&c)?;
            for idx in 0..(1usize << k) {
                let want: f64 = if idx.count_ones() % 2 == 0 { 0.7 } else { -0.7 };
                let entry = u[(idx, idx)];
                worst = worst.max((entry.arg() - want).abs().max((entry.norm() - 1.0).abs()));
            }
        }
        Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
    });
    b.run("block_decode_majority", || {
        let y = repcode::repetition_expand(&[1, 0, 1], 5);
        let ok = repcode::block_decode(&y, 5)? == vec![1, 0, 1];
        Ok((ok, "clean codeword".into()))
    });
    b.run("repcode_pipeline_bound", || {
        let base = circuit::build_iqp_cluster(2, 1, &circuit::random_exponents(2, 3))?;
        let rep = repcode::repcode_pipeline(&base, 9, NoiseSpec::new(0.05, 0.05)?, 41, 20_000)?;
        Ok((
            rep.tvd <= rep.bound + 3.0 * rep.sampling_stderr,
            format!("tvd {:.4} ≤ bound {:.4}", rep.tvd, rep.bound),
        ))
    });

    // --- markov structure ----------------------------------------------------
    b.run("cmi_strong_subadditivity", || {
        let t = Tripartition::new(vec![0], vec![1], vec![2]).unwrap();
        let mut min = f64::INFINITY;
        for seed in 0..20 {
            let rho = random_state(3, 700 + seed);
            min = min.min(markov::cmi(&rho, &t)?);
        }
        Ok((min > -1e-9, format!("min CMI {min:.2e}")))
    });
    b.run("hammersley_clifford", || {
        let c = circuit::random_brickwork_1d(4, 1, 3);
        let hp = hamiltonian::build_parent(&c)?;
        let (rho, _) = hamiltonian::gibbs_state(&hp, 1.0)?;
        let t = Tripartition::new(vec![0], vec![1, 2], vec![3]).unwrap();
        let shielded = markov::is_shielding(&hp, &t);
        let i = markov::cmi(&rho, &t)?;
        Ok((shielded && i < 1e-8, format!("CMI {i:.2e}")))
    });
    b.run("petz_exact_on_markov_states", || {
        let c = circuit::random_brickwork_1d(4, 1, 3);
        let hp = hamiltonian::build_parent(&c)?;
        let (rho, _) = hamiltonian::gibbs_state(&hp, 1.0)?;
        let t = Tripartition::new(vec![0], vec![1, 2], vec![3]).unwrap();
        let rec = markov::petz_recover(&rho, &t)?;
        let d = dense::divergences(&rho, &rec)?.trace_distance;
        Ok((d < 1e-7, format!("recovery TD {d:.2e}")))
    });
    b.run("fawzi_renner_random_states", || {
        let t = Tripartition::new(vec![0], vec![1], vec![2]).unwrap();
        let mut worst = f64::INFINITY;
        for seed in 0..40 {
            let rho = random_state(3, 800 + seed);
            let i = markov::cmi(&rho, &t)?;
            let rec = markov::petz_recover(&rho, &t)?;
            let err = dense::divergences(&rho, &rec)?.trace_distance * 2.0;
            worst = worst.min(i - err * err / (4.0 * std::f64::consts::LN_2));
        }
        Ok((worst > -1e-9, format!("min margin {worst:.3e}")))
    });
    b.run("local_indistinguishability_1d", || {
        let mut c = Circuit::new(6);
        c.push_layer(vec![Gate::Cnot(0, 1), Gate::Cnot(2, 3), Gate::Cnot(4, 5)])?;
        let lat = Lattice::chain(6);
        let t = Tripartition::new(vec![0], vec![1, 2, 3, 4], vec![5]).unwrap();
        let rep = markov::local_indistinguishability_check(&c, &lat, &t, 1.0)?;
        let ok = rep.residual < 1e-10 && rep.decoupling_residual < 1e-10;
        Ok((
            ok,
            format!(
                "LI {:.2e}, decoupling {:.2e}",
                rep.residual, rep.decoupling_residual
            ),
        ))
    });

    let all_passed = b.checks.iter().all(|c| c.pass);
    VerifyReport {
        version: env!("CARGO_PKG_VERSION"),
        checks: b.checks,
        all_passed,
    }
}
