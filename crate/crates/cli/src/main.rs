//! Command-line front end: parse circuits or build the cluster-IQP family,
//! dispatch experiments, and emit deterministic JSON/CSV artifacts.

mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gibbslab::circuit::{self, Circuit};
use gibbslab::distill;
use gibbslab::error::Error;
use gibbslab::hamiltonian;
use gibbslab::lindblad;
use gibbslab::markov::{self, Lattice, Tripartition};
use gibbslab::noise::{self, NoiseSpec};
use gibbslab::repcode;

#[derive(Parser)]
#[command(
    name = "gibbslab",
    version,
    about = "Gibbs states of parent Hamiltonians of shallow circuits: thermalization diagnostics and fault-tolerant IQP sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CircuitSource {
    /// Circuit file (text format; see README)
    #[arg(long, value_name = "PATH", conflicts_with = "grid")]
    circuit: Option<PathBuf>,
    /// Cluster-IQP grid, e.g. 2x2
    #[arg(long, value_name = "WxH")]
    grid: Option<String>,
    /// Seed for the random T-power exponents of --grid
    #[arg(long, value_name = "S", default_value_t = 0)]
    b_seed: u64,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Output path (stdout if omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Trace distance between the Gibbs state and the noisy circuit output
    GibbsCheck {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Build the Davies generator and report gap / detailed balance
    Davies {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Halving time and relative-entropy decay along e^{tL}
    Mixing {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Largest grid time
        #[arg(long, default_value_t = 25.0)]
        t_max: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Convex decomposition of the rotated generator
    Convex {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Distillation failure rates: exact oracle vs Monte Carlo over p
    DistillSweep {
        /// Gadget as B,D (arity, node levels)
        #[arg(long, value_name = "B,D")]
        gadget: String,
        #[arg(long, default_value_t = 1_000_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Assemble gadgets onto an IQP base circuit, sample, decode, report TVD
    FtPipeline {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, value_name = "B,D", default_value = "3,3")]
        gadget: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Write corrected samples here (one bitstring per line, JSON sidecar)
        #[arg(long, value_name = "PATH")]
        dump_samples: Option<PathBuf>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Repetition-code pipeline under input and output noise
    Repcode {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 9)]
        rep: usize,
        #[arg(long, default_value_t = 0.05)]
        p_in: f64,
        #[arg(long, default_value_t = 0.05)]
        p_out: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Markov-structure report over all shielding tripartitions
    Markov {
        #[command(flatten)]
        source: CircuitSource,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the named invariant battery; nonzero exit on any failure
    Verify {
        /// Test fixture: flip the Glauber weight sign and expect detection
        #[arg(long, hide = true)]
        inject_weight_sign_bug: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::Structure(_)
                | Error::Geometry(_) => ExitCode::from(2),
                Error::Capacity { .. } | Error::Numerical(_) => ExitCode::from(1),
            }
        }
    }
}

fn load_circuit(source: &CircuitSource) -> Result<Circuit, Error> {
    if let Some(path) = &source.circuit {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        return circuit::parse_circuit(&text);
    }
    if let Some(grid) = &source.grid {
        let (w, h) = parse_pair(grid, 'x')?;
        let b = circuit::random_exponents(w * h, source.b_seed);
        return circuit::build_iqp_cluster(w, h, &b);
    }
    Err(Error::InvalidArgument(
        "need either --circuit PATH or --grid WxH".into(),
    ))
}

fn parse_pair(text: &str, sep: char) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = text.split(sep).collect();
    if parts.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected two values separated by '{sep}', got `{text}`"
        )));
    }
    let a = parts[0]
        .trim()
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad value `{}`: {e}", parts[0])))?;
    let b = parts[1]
        .trim()
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad value `{}`: {e}", parts[1])))?;
    Ok((a, b))
}

fn circuit_hash(c: &Circuit) -> String {
    // FNV-1a over the canonical text serialization
    let mut h: u64 = 0xcbf29ce484222325;
    for byte in circuit::write_circuit(c).bytes() {
        h ^= byte as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

fn emit<T: Serialize>(output: &OutputOpts, value: &T) -> Result<(), Error> {
    if output.format == Format::Csv {
        return Err(Error::InvalidArgument(
            "this subcommand emits JSON only".into(),
        ));
    }
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Numerical(format!("serialization failed: {e}")))?;
    write_text(output, &format!("{text}\n"))
}

fn write_text(output: &OutputOpts, text: &str) -> Result<(), Error> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    version: &'static str,
    circuit_hash: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl ConfigEcho {
    fn new(c: &Circuit, beta: Option<f64>, seed: Option<u64>) -> Self {
        ConfigEcho {
            version: env!("CARGO_PKG_VERSION"),
            circuit_hash: circuit_hash(c),
            n: c.n(),
            beta,
            seed,
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::GibbsCheck {
            source,
            beta,
            output,
        } => {
            let c = load_circuit(&source)?;
            let residual = noise::gibbs_equivalence_check(&c, beta)?;
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                p: f64,
                residual: f64,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), None),
                    p: noise::beta_to_p(beta)?,
                    residual,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Davies {
            source,
            beta,
            output,
        } => {
            let c = load_circuit(&source)?;
            let hp = hamiltonian::build_parent(&c)?;
            let gen = lindblad::build_davies(&hp, beta)?;
            let db = lindblad::detailed_balance_check(&gen, 0.5)?;
            let disc = lindblad::discriminant(&gen, 0.5)?;
            let fixed = gibbslab::linalg::max_abs(&gen.superop().apply(gen.rho_beta().matrix()));
            let eigs = gibbslab::linalg::eigenvalues(gen.superop().matrix())?;
            let max_imag = eigs.iter().map(|l| l.im.abs()).fold(0.0, f64::max);
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                jump_count: usize,
                gap: f64,
                db_residual: f64,
                discriminant_residual: f64,
                fixed_point_residual: f64,
                max_imag_eigenvalue: f64,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), None),
                    jump_count: gen.jumps().len(),
                    gap: disc.gap,
                    db_residual: db.pair_residual,
                    discriminant_residual: db.discriminant_residual,
                    fixed_point_residual: fixed,
                    max_imag_eigenvalue: max_imag,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Mixing {
            source,
            beta,
            t_max,
            points,
            output,
        } => {
            let c = load_circuit(&source)?;
            if points < 2 {
                return Err(Error::InvalidArgument("need at least 2 grid points".into()));
            }
            let hp = hamiltonian::build_parent(&c)?;
            let gen = lindblad::build_davies(&hp, beta)?;
            let grid: Vec<f64> = (0..points)
                .map(|i| t_max * i as f64 / (points - 1) as f64)
                .collect();
            let rep = lindblad::mixing_diagnostics(&gen, &grid)?;
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                halving_time: Option<f64>,
                fitted_rate: f64,
                entropy_curve: Vec<(f64, f64)>,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), None),
                    halving_time: rep.halving_time,
                    fitted_rate: rep.fitted_rate,
                    entropy_curve: rep.entropy_curve,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Convex {
            source,
            beta,
            output,
        } => {
            let c = load_circuit(&source)?;
            let hp = hamiltonian::build_parent(&c)?;
            let gen = lindblad::build_davies(&hp, beta)?;
            let rep = lindblad::convex_decomposition(&gen)?;
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                q: f64,
                identity_residual: f64,
                rest_fixed_point_residual: f64,
                rest_cptp_min_choi_eig: f64,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), None),
                    q: rep.q,
                    identity_residual: rep.identity_residual,
                    rest_fixed_point_residual: rep.rest_fixed_point_residual,
                    rest_cptp_min_choi_eig: rep.rest_cptp.min_choi_eig,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::DistillSweep {
            gadget,
            trials,
            seed,
            output,
        } => {
            let (arity, levels) = parse_pair(&gadget, ',')?;
            let ps = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30];
            #[derive(Serialize)]
            struct Row {
                arity: usize,
                levels: usize,
                p: f64,
                exact_rate: f64,
                mc_rate: f64,
                stderr: f64,
                trials: usize,
            }
            let mut rows = Vec::new();
            for &p in &ps {
                let exact = distill::exact_failure_rate(arity, levels, p)?;
                let mc = distill::mc_failure_rate(arity, levels, p, trials, seed)?;
                rows.push(Row {
                    arity,
                    levels,
                    p,
                    exact_rate: exact,
                    mc_rate: mc.rate,
                    stderr: mc.stderr,
                    trials,
                });
            }
            match output.format {
                Format::Csv => {
                    let mut text = String::from("B,D,p,exact_rate,mc_rate,stderr,trials\n");
                    for r in &rows {
                        text.push_str(&format!(
                            "{},{},{},{:.12e},{:.12e},{:.12e},{}\n",
                            r.arity, r.levels, r.p, r.exact_rate, r.mc_rate, r.stderr, r.trials
                        ));
                    }
                    write_text(&output, &text)?;
                }
                Format::Json => {
                    let text = serde_json::to_string_pretty(&rows)
                        .map_err(|e| Error::Numerical(e.to_string()))?;
                    write_text(&output, &format!("{text}\n"))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::FtPipeline {
            source,
            beta,
            gadget,
            seed,
            samples,
            dump_samples,
            output,
        } => {
            let c = load_circuit(&source)?;
            let (arity, levels) = parse_pair(&gadget, ',')?;
            let ft = distill::assemble_ft_circuit(&c, arity, levels)?;
            let rep = distill::ft_pipeline(&ft, beta, seed, samples)?;
            if let Some(path) = dump_samples {
                dump_sample_file(&path, &c, &rep, beta, seed)?;
            }
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                arity: usize,
                levels: usize,
                total_bits: usize,
                noise_rate: f64,
                tvd: f64,
                failure_bound: f64,
                sampling_stderr: f64,
                samples: usize,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), Some(seed)),
                    arity,
                    levels,
                    total_bits: ft.total_bits(),
                    noise_rate: rep.noise_rate,
                    tvd: rep.tvd,
                    failure_bound: rep.failure_bound,
                    sampling_stderr: rep.sampling_stderr,
                    samples,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Repcode {
            source,
            rep,
            p_in,
            p_out,
            seed,
            samples,
            output,
        } => {
            let c = load_circuit(&source)?;
            let spec = NoiseSpec::new(p_in, p_out)?;
            let report = repcode::repcode_pipeline(&c, rep, spec, seed, samples)?;
            match output.format {
                Format::Csv => {
                    let text = format!(
                        "n,r,p_in,p_out,q,bound,measured_tvd,samples\n{},{},{},{},{},{:.12e},{:.12e},{}\n",
                        c.n(),
                        rep,
                        p_in,
                        p_out,
                        report.q,
                        report.bound,
                        report.tvd,
                        samples
                    );
                    write_text(&output, &text)?;
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Out {
                        config: ConfigEcho,
                        r: usize,
                        p_in: f64,
                        p_out: f64,
                        q: f64,
                        bound: f64,
                        measured_tvd: f64,
                        samples: usize,
                    }
                    emit(
                        &output,
                        &Out {
                            config: ConfigEcho::new(&c, None, Some(seed)),
                            r: rep,
                            p_in,
                            p_out,
                            q: report.q,
                            bound: report.bound,
                            measured_tvd: report.tvd,
                            samples,
                        },
                    )?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Markov {
            source,
            beta,
            output,
        } => {
            let c = load_circuit(&source)?;
            if c.n() > 6 {
                return Err(Error::capacity("markov report", c.n(), 6));
            }
            let lattice = match &source.grid {
                Some(grid) => {
                    let (w, h) = parse_pair(grid, 'x')?;
                    Lattice::grid(w, h)
                }
                None => Lattice::chain(c.n()),
            };
            let hp = hamiltonian::build_parent(&c)?;
            let (rho, _) = hamiltonian::gibbs_state(&hp, beta)?;
            #[derive(Serialize)]
            struct Row {
                a: Vec<usize>,
                b: Vec<usize>,
                c: Vec<usize>,
                shielding: bool,
                cmi: f64,
                petz_residual: f64,
                li_residual: Option<f64>,
            }
            let mut rows = Vec::new();
            for t in enumerate_tripartitions(c.n()) {
                if !markov::is_shielding(&hp, &t) {
                    continue;
                }
                let cmi = markov::cmi(&rho, &t)?;
                let rec = markov::petz_recover(&rho, &t)?;
                let petz_residual = gibbslab::dense::divergences(&rho, &rec)?.trace_distance;
                let li_residual = match t.distance_ac(&lattice) {
                    Some(d) if d >= 4 * c.depth() + 1 => Some(
                        markov::local_indistinguishability_check(&c, &lattice, &t, beta)?.residual,
                    ),
                    _ => None,
                };
                rows.push(Row {
                    a: t.a.clone(),
                    b: t.b.clone(),
                    c: t.c.clone(),
                    shielding: true,
                    cmi,
                    petz_residual,
                    li_residual,
                });
            }
            #[derive(Serialize)]
            struct Out {
                config: ConfigEcho,
                tripartitions: Vec<Row>,
            }
            emit(
                &output,
                &Out {
                    config: ConfigEcho::new(&c, Some(beta), None),
                    tripartitions: rows,
                },
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            inject_weight_sign_bug,
            output,
        } => {
            let report = verify::run_verify(inject_weight_sign_bug);
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Numerical(e.to_string()))?;
            write_text(&output, &format!("{text}\n"))?;
            for check in &report.checks {
                eprintln!(
                    "{} {}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name
                );
            }
            if report.all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

/// All assignments of [n] into (A, B, C) with A, C nonempty (B may be empty).
fn enumerate_tripartitions(n: usize) -> Vec<Tripartition> {
    let mut out = Vec::new();
    let mut assignment = vec![0u8; n];
    loop {
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for (q, &which) in assignment.iter().enumerate() {
            match which {
                0 => a.push(q),
                1 => b.push(q),
                _ => c.push(q),
            }
        }
        if !a.is_empty() && !c.is_empty() {
            out.push(Tripartition::new(a, b, c).unwrap());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            assignment[i] += 1;
            if assignment[i] < 3 {
                break;
            }
            assignment[i] = 0;
            i += 1;
        }
    }
}

fn dump_sample_file(
    path: &PathBuf,
    base: &Circuit,
    rep: &distill::FtReport,
    beta: f64,
    seed: u64,
) -> Result<(), Error> {
    let n = base.n();
    let mut text = String::new();
    for &s in &rep.corrected_samples {
        for i in 0..n {
            text.push(if (s >> (n - 1 - i)) & 1 == 1 { '1' } else { '0' });
        }
        text.push('\n');
    }
    std::fs::write(path, text)
        .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
    #[derive(Serialize)]
    struct Sidecar {
        p_in: f64,
        p_out: f64,
        seed: u64,
        count: usize,
        circuit_hash: String,
    }
    let sidecar = Sidecar {
        p_in: noise::beta_to_p(beta)?,
        p_out: 0.0,
        seed,
        count: rep.samples,
        circuit_hash: circuit_hash(base),
    };
    let side_path = path.with_extension("json");
    std::fs::write(
        &side_path,
        serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Numerical(e.to_string()))?,
    )
    .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", side_path.display())))
}
