//! Command-line front end: parses a Coxeter graph file, dispatches to the
//! engine, and prints a deterministic key: value report.
//!
//! Exit codes: 0 all assertions passed, 1 assertion failure, 2 usage or
//! input error, 3 resource cap exceeded.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coxeter_core::congruence::{
    build_context, default_prime, gamma_orbits, shape, torsion_certificate, CongruenceCtx,
    OrbitPartition, OrbitStatus,
};
use coxeter_core::coxeter::{
    moussong_check, parse_coxeter_graph, simplicity_verdict, CoxeterSystem, FormCategory,
    MOUSSONG_RANK_CAP,
};
use coxeter_core::error::CoxError;
use coxeter_core::group::{reflections_up_to, Ball, Element, GroupCtx};
use coxeter_core::harmonic::{
    gamma_ball, haagerup_gamma_check, haagerup_length_check, icc_scan, opnorm_lower,
    powers_average_experiment, realizable_shapes, word_basis, BallFunction,
};
use coxeter_core::trees::{
    build_tree, check_acyclic, d1_isometry_check, free_action_check, freeness_check,
    inversion_indices, ping_pong_pair, valency_witness, TreeClass,
};

const SCHEMA: &str = "1";

#[derive(Parser)]
#[command(name = "coxeter", version, about = "exact engine for Coxeter systems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the Gram form and report the amenability / simplicity verdict
    Classify { file: String },
    /// Enumerate the ball of a given radius and report sphere sizes
    Ball {
        file: String,
        #[arg(long, default_value_t = 6)]
        radius: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Enumerate reflections up to a word length
    Reflections {
        file: String,
        #[arg(long, default_value_t = 9)]
        max_length: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Word length, normal form and inversion count of a word
    Length {
        file: String,
        #[arg(long)]
        word: String,
    },
    /// Congruence subgroup: torsion certificate and ball census
    Gamma {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 6)]
        radius: usize,
        #[arg(long, default_value_t = 60)]
        order_bound: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Reflection orbit decomposition under Gamma-conjugation
    Orbits {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 9)]
        refl: usize,
        #[arg(long, default_value_t = 4)]
        conj: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Shape vector of a Gamma element
    Shape {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 11)]
        refl: usize,
        #[arg(long, default_value_t = 2)]
        conj: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Build orbit tree truncations and classify them
    Trees {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 5)]
        radius: usize,
        #[arg(long, default_value_t = 9)]
        refl: usize,
        #[arg(long, default_value_t = 4)]
        conj: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Certify a free subgroup by ping-pong on a branching vertex
    Free {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 0)]
        generator: usize,
        #[arg(long, default_value_t = 8)]
        chamber_radius: usize,
        #[arg(long, default_value_t = 10)]
        conj_radius: usize,
        #[arg(long, default_value_t = 6)]
        syllables: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Randomized convolution-norm inequality checks on Gamma
    Haagerup {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, value_parser = ["shape", "length"])]
        mode: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        pool_radius: usize,
        #[arg(long, default_value_t = 15)]
        refl: usize,
        #[arg(long, default_value_t = 2)]
        conj: usize,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Powers-style averaging experiment on the certified free pair
    Powers {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        /// conjugated element as a word; default: the shortest Gamma element
        #[arg(long)]
        k: Option<String>,
        #[arg(long, default_value_t = 16)]
        nmax: usize,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Conjugacy class growth scan
    Icc {
        file: String,
        #[arg(long)]
        w: String,
        #[arg(long, default_value = "2,4,6")]
        radii: String,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
    /// Consolidated pipeline report
    Report {
        file: String,
        #[arg(long)]
        prime: Option<u64>,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        #[arg(long, default_value_t = 2_000_000)]
        cap: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CoxError) -> u8 {
    match e {
        CoxError::Parse { .. }
        | CoxError::UnknownGenerator(_)
        | CoxError::BadPrime { .. }
        | CoxError::Precondition(_) => 2,
        CoxError::ResourceCap(_)
        | CoxError::PrecisionExceeded(_)
        | CoxError::RankCap { .. }
        | CoxError::TruncationTooSmall(_)
        | CoxError::ConjugateEscapes(_)
        | CoxError::PartitionCoverage(_) => 3,
        CoxError::Internal(_) | CoxError::CrossSystem => 1,
    }
}

fn load(file: &str) -> Result<GroupCtx, CoxError> {
    let text = std::fs::read_to_string(file).map_err(|e| CoxError::Parse {
        line: 0,
        msg: format!("{}: {}", file, e),
    })?;
    let cm = parse_coxeter_graph(&text)?;
    Ok(GroupCtx::new(CoxeterSystem::new(cm)?))
}

fn parse_word(ctx: &GroupCtx, text: &str) -> Result<Vec<usize>, CoxError> {
    text.split_whitespace()
        .map(|name| ctx.system().matrix().generator_index(name))
        .collect()
}

fn header(command: &str, file: &str) {
    println!("artifact: coxeter-engine");
    println!("version: {}", env!("CARGO_PKG_VERSION"));
    println!("schema: {}", SCHEMA);
    println!("command: {}", command);
    println!("input: {}", file);
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn print_orbit_summary(part: &OrbitPartition) {
    println!("lambda: {}", part.lambda);
    println!(
        "orbit_status: {}",
        match part.status {
            OrbitStatus::Stabilized => "stabilized",
            OrbitStatus::LowerBound => "lower-bound",
        }
    );
    println!("image_lower_bound: {}", part.image_lower_bound);
    println!("certified: {}", part.certified);
    println!("orbit_sizes: {}", join(&part.orbit_sizes()));
}

struct CongSetup {
    ctx: GroupCtx,
    cong: CongruenceCtx,
    prime: u64,
}

fn setup(file: &str, prime: Option<u64>) -> Result<CongSetup, CoxError> {
    let ctx = load(file)?;
    let prime = prime.unwrap_or_else(|| default_prime(&ctx));
    let cong = build_context(&ctx, Some(prime))?;
    Ok(CongSetup { ctx, cong, prime })
}

fn shortest_gamma_element(
    ctx: &GroupCtx,
    cong: &CongruenceCtx,
    radius: usize,
    cap: usize,
) -> Result<Option<Element>, CoxError> {
    let ball = Ball::new(ctx, radius, cap)?;
    for bi in 1..ball.len() {
        let el = ball.get(bi);
        if cong.is_in_gamma(el)? {
            return Ok(Some(el.clone()));
        }
    }
    Ok(None)
}

fn run(cmd: &Cmd) -> Result<bool, CoxError> {
    match cmd {
        Cmd::Classify { file } => {
            let ctx = load(file)?;
            header("classify", file);
            cmd_classify(&ctx)
        }
        Cmd::Ball { file, radius, cap } => {
            let ctx = load(file)?;
            header("ball", file);
            println!("radius: {}", radius);
            let ball = Ball::new(&ctx, *radius, *cap)?;
            println!("size: {}", ball.len());
            println!("sphere_sizes: {}", join(&ball.sphere_sizes()));
            Ok(true)
        }
        Cmd::Reflections {
            file,
            max_length,
            cap,
        } => {
            let ctx = load(file)?;
            header("reflections", file);
            println!("max_length: {}", max_length);
            let refls = reflections_up_to(&ctx, *max_length, *cap)?;
            println!("count: {}", refls.len());
            let mut hist = vec![0usize; max_length + 1];
            for r in &refls {
                hist[r.length] += 1;
            }
            println!("by_length: {}", join(&hist));
            Ok(true)
        }
        Cmd::Length { file, word } => {
            let ctx = load(file)?;
            header("length", file);
            let w = parse_word(&ctx, word)?;
            let g = ctx.from_word(&w);
            let len = ctx.length(&g)?;
            println!("input_word: {}", ctx.word_string(&w));
            println!("length: {}", len);
            println!("shortlex: {}", ctx.word_string(&ctx.shortlex_word(&g)?));
            println!(
                "inversions: {}",
                coxeter_core::group::inversion_set(&ctx, &g)?.len()
            );
            Ok(true)
        }
        Cmd::Gamma {
            file,
            prime,
            radius,
            order_bound,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("gamma", file);
            println!("prime: {}", s.prime);
            println!("dim: {}", s.cong.dim());
            println!("radius: {}", radius);
            let cert = torsion_certificate(&s.ctx, &s.cong, *radius, *order_bound, *cap)?;
            println!("gamma_elements: {}", cert.gamma_elements);
            println!("order_bound: {}", cert.order_bound);
            match &cert.torsion_witness {
                None => println!("torsion_witness: none"),
                Some(w) => {
                    println!("torsion_witness: {}", s.ctx.word_string(w));
                    println!("status: fail");
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Cmd::Orbits {
            file,
            prime,
            refl,
            conj,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("orbits", file);
            println!("prime: {}", s.prime);
            println!("refl_radius: {}", refl);
            println!("conj_radius: {}", conj);
            let part = gamma_orbits(&s.ctx, &s.cong, *refl, *conj, *cap)?;
            print_orbit_summary(&part);
            Ok(true)
        }
        Cmd::Shape {
            file,
            prime,
            word,
            refl,
            conj,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("shape", file);
            println!("prime: {}", s.prime);
            let w = parse_word(&s.ctx, word)?;
            let g = s.ctx.from_word(&w);
            let part = gamma_orbits(&s.ctx, &s.cong, *refl, *conj, *cap)?;
            let sv = shape(&s.ctx, &s.cong, &part, &g)?;
            println!("word: {}", s.ctx.word_string(&w));
            println!("length: {}", s.ctx.length(&g)?);
            println!("lambda: {}", part.lambda);
            println!("shape: {}", join(&sv));
            println!("shape_sum: {}", sv.iter().sum::<usize>());
            Ok(true)
        }
        Cmd::Trees {
            file,
            prime,
            radius,
            refl,
            conj,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("trees", file);
            println!("prime: {}", s.prime);
            println!("radius: {}", radius);
            let part = gamma_orbits(&s.ctx, &s.cong, *refl, *conj, *cap)?;
            print_orbit_summary(&part);
            let ball = Ball::new(&s.ctx, *radius, *cap)?;
            let inv_idx = inversion_indices(&s.ctx, &part, &ball)?;
            let mut class_counts = [0usize; 3];
            for i in 0..part.lambda {
                let tree = build_tree(&s.ctx, &part, &ball, &inv_idx, i)?;
                if let Some(cycle) = check_acyclic(&tree) {
                    println!("tree_{}_cycle: {}", i, join(&cycle));
                    println!("status: fail");
                    return Ok(false);
                }
                let (class, _) = coxeter_core::trees::valency_profile(&tree);
                class_counts[match class {
                    TreeClass::I1 => 0,
                    TreeClass::I2 => 1,
                    TreeClass::I3 => 2,
                }] += 1;
            }
            println!("acyclic: all");
            println!(
                "classes: I1={} I2={} I3={}",
                class_counts[0], class_counts[1], class_counts[2]
            );
            let pairs = d1_isometry_check(&part, &inv_idx, &ball, &s.ctx)?;
            println!("d1_isometry_pairs: {}", pairs);
            Ok(true)
        }
        Cmd::Free {
            file,
            prime,
            generator,
            chamber_radius,
            conj_radius,
            syllables,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("free", file);
            println!("prime: {}", s.prime);
            if *generator >= s.ctx.rank() {
                return Err(CoxError::Precondition(format!(
                    "generator index {} out of range",
                    generator
                )));
            }
            let t0 = s.ctx.generator(*generator);
            let w = valency_witness(&s.ctx, &s.cong, &t0, *chamber_radius, *conj_radius, *cap)?;
            println!("chamber_radius: {}", chamber_radius);
            println!("conj_radius: {}", conj_radius);
            println!("valency: {}", w.valency);
            println!("component_size: {}", w.component_size);
            println!("orbit_sample: {}", w.orbit_sample.len());
            let h = shortest_gamma_element(&s.ctx, &s.cong, 6, *cap)?.ok_or_else(|| {
                CoxError::Precondition("no non-trivial Gamma element in ball(6)".into())
            })?;
            let cert = ping_pong_pair(&s.ctx, &s.cong, &w, &h, *cap)?;
            println!("h_length: {}", s.ctx.length(&cert.h)?);
            println!("v_length: {}", s.ctx.length(&cert.v)?);
            match cert.v_amplitude_exact {
                Some(a) => println!("v_amplitude: {}", a),
                None => println!("v_amplitude: unresolved"),
            }
            println!("order_checked_to: {}", cert.order_checked_to);
            println!("containment_samples: {}", cert.containment_samples);
            let words = freeness_check(&cert.h, &cert.v, *syllables, *cap)?;
            println!("free_words_checked: {}", words);
            println!("syllables: {}", syllables);
            Ok(true)
        }
        Cmd::Haagerup {
            file,
            prime,
            mode,
            n,
            trials,
            seed,
            pool_radius,
            refl,
            conj,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("haagerup", file);
            println!("prime: {}", s.prime);
            println!("mode: {}", mode);
            println!("n: {}", n);
            println!("trials: {}", trials);
            println!("seed: {}", seed);
            println!("pool_radius: {}", pool_radius);
            let part = gamma_orbits(&s.ctx, &s.cong, *refl, *conj, *cap)?;
            let pool = gamma_ball(&s.ctx, &s.cong, *pool_radius, *cap)?;
            println!("pool_size: {}", pool.len());
            println!("lambda: {}", part.lambda);
            if mode == "shape" {
                let shapes = realizable_shapes(&s.ctx, &s.cong, &part, &pool)?;
                let mut found = 0usize;
                for (sv, _count) in &shapes {
                    if sv.iter().sum::<usize>() != *n {
                        continue;
                    }
                    found += 1;
                    let r = haagerup_gamma_check(
                        &s.ctx, &s.cong, &part, sv, &pool, *trials, *seed, *cap,
                    )?;
                    println!("shape: {}", join(sv));
                    println!("class_size: {}", r.class_size);
                    println!("bound: {}", r.bound);
                    println!("max_ratio: {:.6e}", r.max_ratio);
                }
                if found == 0 {
                    return Err(CoxError::Precondition(format!(
                        "no realizable shape of total {} in the pool",
                        n
                    )));
                }
            } else {
                let r =
                    haagerup_length_check(&s.ctx, &s.cong, &part, *n, &pool, *trials, *seed, *cap)?;
                println!("class_size: {}", r.class_size);
                println!("bound: {:.6e}", r.bound);
                println!("max_ratio: {:.6e}", r.max_ratio);
            }
            Ok(true)
        }
        Cmd::Powers {
            file,
            prime,
            k,
            nmax,
            depth,
            seed,
            cap,
        } => {
            let s = setup(file, *prime)?;
            header("powers", file);
            println!("prime: {}", s.prime);
            println!("nmax: {}", nmax);
            println!("depth: {}", depth);
            println!("seed: {}", seed);
            let t0 = s.ctx.generator(0);
            let w = valency_witness(&s.ctx, &s.cong, &t0, 8, 10, *cap)?;
            let h = shortest_gamma_element(&s.ctx, &s.cong, 6, *cap)?.ok_or_else(|| {
                CoxError::Precondition("no non-trivial Gamma element in ball(6)".into())
            })?;
            let cert = ping_pong_pair(&s.ctx, &s.cong, &w, &h, *cap)?;
            let k_el = match k {
                Some(text) => s.ctx.from_word(&parse_word(&s.ctx, text)?),
                None => cert.h.clone(),
            };
            if k_el.is_identity() {
                return Err(CoxError::Precondition("k must be non-trivial".into()));
            }
            let rep = powers_average_experiment(&k_el, &cert.v, *nmax, *depth, *seed, *cap)?;
            println!("basis_size: {}", rep.basis_size);
            for (i, v) in rep.estimates.iter().enumerate() {
                println!("average_{}: {:.6}", i + 1, v);
            }
            println!("final: {:.6}", rep.estimates[rep.estimates.len() - 1]);
            println!("coefficient_ratio: {:.6}", rep.coefficient_ratio);
            Ok(true)
        }
        Cmd::Icc {
            file,
            w,
            radii,
            cap,
        } => {
            let ctx = load(file)?;
            header("icc", file);
            let word = parse_word(&ctx, w)?;
            let el = ctx.from_word(&word);
            let radii: Vec<usize> = radii
                .split(',')
                .map(|p| {
                    p.trim().parse::<usize>().map_err(|_| CoxError::Precondition(
                        format!("bad radius '{}'", p),
                    ))
                })
                .collect::<Result<_, _>>()?;
            // strict growth is asserted only under the icc hypotheses:
            // indecomposable, indefinite, non-degenerate
            let verdict = simplicity_verdict(ctx.system())?;
            let strict = verdict.components.len() == 1
                && verdict.components[0].1.category == FormCategory::IndefiniteNondegenerate;
            println!("w: {}", ctx.word_string(&word));
            println!("radii: {}", join(&radii));
            println!("assert_strict: {}", strict);
            let counts = icc_scan(&ctx, &el, &radii, strict, *cap)?;
            println!("conjugate_counts: {}", join(&counts));
            Ok(true)
        }
        Cmd::Report {
            file,
            prime,
            seed,
            cap,
        } => cmd_report(file, *prime, *seed, *cap),
    }
}

fn cmd_classify(ctx: &GroupCtx) -> Result<bool, CoxError> {
    let sys = ctx.system();
    let report = simplicity_verdict(sys)?;
    println!("rank: {}", sys.rank());
    println!("components: {}", report.components.len());
    for (i, (subset, class, verdict)) in report.components.iter().enumerate() {
        let names: Vec<&str> = subset
            .iter()
            .map(|&j| sys.matrix().names()[j].as_str())
            .collect();
        println!("component_{}: {}", i, names.join(" "));
        println!(
            "component_{}_signature: ({},{},{})",
            i, class.n_plus, class.n_minus, class.n_zero
        );
        println!("component_{}_category: {}", i, class.category.as_str());
        println!("component_{}_verdict: {}", i, verdict.as_str());
    }
    match moussong_check(sys, MOUSSONG_RANK_CAP) {
        Ok(m) => println!("hyperbolic: {}", m.hyperbolic),
        Err(CoxError::RankCap { .. }) => println!("hyperbolic: not-checked (rank cap)"),
        Err(e) => return Err(e),
    }
    println!("overall_simple: {}", report.overall_simple);
    Ok(true)
}

fn cmd_report(file: &str, prime: Option<u64>, seed: u64, cap: usize) -> Result<bool, CoxError> {
    let s = setup(file, prime)?;
    header("report", file);
    println!("prime: {}", s.prime);
    println!("seed: {}", seed);
    println!("cap: {}", cap);
    println!("section: classify");
    cmd_classify(&s.ctx)?;

    println!("section: gamma");
    let cert = torsion_certificate(&s.ctx, &s.cong, 6, 60, cap)?;
    println!("gamma_elements_ball6: {}", cert.gamma_elements);
    let mut ok = true;
    match &cert.torsion_witness {
        None => println!("torsion_witness: none"),
        Some(w) => {
            println!("torsion_witness: {}", s.ctx.word_string(w));
            ok = false;
        }
    }

    println!("section: orbits");
    let part = gamma_orbits(&s.ctx, &s.cong, 11, 4, cap)?;
    print_orbit_summary(&part);

    println!("section: trees");
    let ball = Ball::new(&s.ctx, 6, cap)?;
    let inv_idx = inversion_indices(&s.ctx, &part, &ball)?;
    let mut class_counts = [0usize; 3];
    for i in 0..part.lambda {
        let tree = build_tree(&s.ctx, &part, &ball, &inv_idx, i)?;
        if check_acyclic(&tree).is_some() {
            println!("tree_{}_acyclic: fail", i);
            ok = false;
            continue;
        }
        let (class, _) = coxeter_core::trees::valency_profile(&tree);
        class_counts[match class {
            TreeClass::I1 => 0,
            TreeClass::I2 => 1,
            TreeClass::I3 => 2,
        }] += 1;
    }
    println!(
        "classes: I1={} I2={} I3={}",
        class_counts[0], class_counts[1], class_counts[2]
    );
    let small_ball = Ball::new(&s.ctx, 4, cap)?;
    let small_idx = inversion_indices(&s.ctx, &part, &small_ball)?;
    println!(
        "d1_isometry_pairs: {}",
        d1_isometry_check(&part, &small_idx, &small_ball, &s.ctx)?
    );
    println!(
        "free_action_pairs: {}",
        free_action_check(&s.ctx, &s.cong, &part, 4, 2, cap)?
    );

    println!("section: haagerup");
    let pool = gamma_ball(&s.ctx, &s.cong, 6, cap)?;
    println!("pool_size: {}", pool.len());
    let shapes = realizable_shapes(&s.ctx, &s.cong, &part, &pool)?;
    for (sv, count) in shapes.iter().filter(|(sv, _)| sv.iter().sum::<usize>() > 0) {
        let r = haagerup_gamma_check(&s.ctx, &s.cong, &part, sv, &pool, 50, seed, cap)?;
        println!("shape: {}", join(sv));
        println!("class_size: {}", count);
        println!("max_ratio: {:.6e}", r.max_ratio);
    }

    println!("section: free");
    let t0 = s.ctx.generator(0);
    match valency_witness(&s.ctx, &s.cong, &t0, 8, 10, cap) {
        Ok(w) if w.valency >= 3 => {
            println!("valency: {}", w.valency);
            let h = shortest_gamma_element(&s.ctx, &s.cong, 6, cap)?;
            match h {
                Some(h) => {
                    let cert = ping_pong_pair(&s.ctx, &s.cong, &w, &h, cap)?;
                    let words = freeness_check(&cert.h, &cert.v, 6, cap)?;
                    println!("free_words_checked: {}", words);
                    // opnorm sanity on the free pair
                    let f = BallFunction::from_terms(vec![
                        (cert.h.clone(), 1.0),
                        (cert.h.inv()?, 1.0),
                        (cert.v.clone(), 1.0),
                        (cert.v.inv()?, 1.0),
                    ]);
                    let basis = word_basis(&cert.h, &cert.v, 6, cap)?;
                    let est = opnorm_lower(&f, &basis, 400, 1e-10, seed)?;
                    println!("kesten_estimate: {:.6}", est.value);
                }
                None => println!("free: skipped (no Gamma element in ball)"),
            }
        }
        Ok(w) => println!("free: skipped (max observed valency {})", w.valency),
        Err(e @ CoxError::Internal(_)) => return Err(e),
        Err(_) => println!("free: skipped (witness unavailable)"),
    }

    println!("section: icc");
    let verdict = simplicity_verdict(s.ctx.system())?;
    let strict = verdict.components.len() == 1
        && verdict.components[0].1.category == FormCategory::IndefiniteNondegenerate;
    println!("assert_strict: {}", strict);
    let counts = icc_scan(&s.ctx, &s.ctx.generator(0), &[2, 4, 6], strict, cap)?;
    println!("conjugate_counts: {}", join(&counts));

    println!("status: {}", if ok { "ok" } else { "fail" });
    Ok(ok)
}
