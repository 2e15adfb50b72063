use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ncconvex::calculus::{partial_hessian_a, partial_hessian_x};
use ncconvex::convexity::{
    certify_convex_in_x, chsy_codimension, decompose_convex_concave, decompose_convex_in_x,
    decompose_separately_convex, generic_rank_probe, hessian_positivity_test, local_rq_form,
    midpoint_convexity_test, ngd, signature_at, signature_estimate, SamplingConfig, Status,
};
use ncconvex::middlematrix::{congruence, middle_matrix_of, BorderMode};
use ncconvex::nalgebra::DVector;
use ncconvex::numeval::{eval_matrixpoly, random_vector, DomainKind, DomainSpec, EvalPoint};
use ncconvex::text::{parse, parse_word};
use ncconvex::{Error, NCPolynomial, VarCounts};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "ncx", version, about = "Convexity analysis for noncommutative polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Numerical tolerance for PSD decisions.
    #[arg(long, default_value_t = 1e-9, global = true)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Args)]
struct PolyArg {
    /// Polynomial text, or `-` to read stdin.
    poly: String,
    /// Number of `a` variables; inferred from the text when omitted.
    #[arg(long)]
    ga: Option<usize>,
    /// Number of `x` variables; inferred from the text when omitted.
    #[arg(long)]
    gx: Option<usize>,
}

#[derive(Args)]
struct Sampling {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Midpoint,
    Hessian,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    XConvex,
    Separate,
    ConvexConcave,
    LocalRq,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    X,
    A,
}

#[derive(Subcommand)]
enum Command {
    /// Partial Hessian in the direction letters.
    Hessian {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, value_enum, default_value_t = Dir::X)]
        direction: Dir,
    },
    /// Border vector and middle matrix of the x-Hessian.
    Middlematrix {
        #[command(flatten)]
        poly: PolyArg,
        /// Use every word up to the degree caps instead of the occurring ones.
        #[arg(long)]
        full: bool,
        /// Set x = 0 in the middle matrix.
        #[arg(long)]
        derived: bool,
    },
    /// Congruence taking the middle matrix to its x = 0 part.
    Congruence {
        #[command(flatten)]
        poly: PolyArg,
        /// Also check B^T Z B = Z(a,0) at random matrix points.
        #[arg(long)]
        verify_numeric: bool,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Randomized convexity test.
    Convexity {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, value_enum, default_value_t = Mode::Midpoint)]
        mode: Mode,
        /// `all` or `ball:R`, applied to x.
        #[arg(long, default_value = "all")]
        domain: String,
        /// `all` or `ball:R`, applied to a.
        #[arg(long, default_value = "all")]
        a_domain: String,
        #[command(flatten)]
        sampling: Sampling,
        /// Try an exact sum-of-squares certificate first.
        #[arg(long)]
        certify: bool,
    },
    /// Structure decompositions.
    Decompose {
        #[command(flatten)]
        poly: PolyArg,
        #[arg(long, value_enum, default_value_t = Form::XConvex)]
        form: Form,
        /// `all` or `ball:R`, applied to a when sampling Z(A).
        #[arg(long, default_value = "all")]
        a_domain: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Eigenvalue counts of the evaluated middle matrix.
    Signature {
        #[command(flatten)]
        poly: PolyArg,
        /// Sample with X = 0.
        #[arg(long)]
        x_zero: bool,
        /// Count at this point (numeval JSON) instead of sampling.
        #[arg(long)]
        point: Option<String>,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Codimension of H -> (H_j m_i(A,X) v).
    Chsy {
        /// Comma-separated words; `1` is the empty word.
        #[arg(long, default_value = "1,x1")]
        monomials: String,
        /// Point in numeval JSON; random when omitted.
        #[arg(long)]
        point: Option<String>,
        /// Comma-separated vector entries; random when omitted.
        #[arg(long)]
        vector: Option<String>,
        #[arg(long, default_value_t = 0)]
        ga: usize,
        #[arg(long, default_value_t = 1)]
        gx: usize,
        /// Dimension of the random point.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Fraction of random points where q(A,X) is invertible.
    RankProbe {
        #[command(flatten)]
        poly: PolyArg,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// N(g,d) = 1 + g + ... + g^d.
    Ngd { g: u64, d: u32 },
}

enum Failure {
    Usage(String),
    Negative(String),
    Inconclusive(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPsd { .. } | Error::HypothesisViolated(_) | Error::ForbiddenMonomial(_) => {
                Failure::Negative(e.to_string())
            }
            Error::Internal(_) => Failure::Inconclusive(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

struct Output {
    json: Value,
    pretty: Option<String>,
    code: u8,
}

impl Output {
    fn ok(json: Value) -> Self {
        Output {
            json,
            pretty: None,
            code: 0,
        }
    }

    fn with_pretty(mut self, text: String) -> Self {
        self.pretty = Some(text);
        self
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Largest index per letter class appearing in the text.
fn infer_counts(text: &str) -> (usize, usize) {
    let bytes = text.as_bytes();
    let (mut ga, mut gx) = (0, 0);
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i + 1;
        let mut j = start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if matches!(c, b'a' | b'x' | b'h') && j > start {
            let idx: usize = text[start..j].parse().unwrap_or(0);
            if c == b'a' {
                ga = ga.max(idx);
            } else {
                gx = gx.max(idx);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    (ga, gx)
}

fn read_source(src: &str) -> Result<String, Failure> {
    if src == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        Ok(src.to_string())
    }
}

fn load_poly(arg: &PolyArg) -> Result<NCPolynomial, Failure> {
    let text = read_source(&arg.poly)?;
    let (ia, ix) = infer_counts(&text);
    let vars = VarCounts::new(arg.ga.unwrap_or(ia), arg.gx.unwrap_or(ix));
    Ok(parse(&text, vars)?)
}

fn parse_domain(s: &str) -> Result<DomainKind, Failure> {
    match s.split_once(':') {
        None if s == "all" => Ok(DomainKind::All),
        Some(("ball", r)) => r
            .parse::<f64>()
            .ok()
            .filter(|r| *r > 0.0)
            .map(|radius| DomainKind::NormBall { radius })
            .ok_or_else(|| Failure::Usage(format!("bad radius in `{s}`"))),
        _ => Err(Failure::Usage(format!("unknown domain `{s}`; use all or ball:R"))),
    }
}

fn read_point(path: &str) -> Result<EvalPoint, Failure> {
    let text = if path == "-" {
        read_source(path)?
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?
    };
    Ok(EvalPoint::from_json(&text)?)
}

fn sampling_config(p: &NCPolynomial, s: &Sampling, domain: DomainSpec) -> SamplingConfig {
    let mut cfg = SamplingConfig::for_poly(p);
    cfg.domain = domain;
    cfg.seed = s.seed;
    if let Some(t) = s.trials {
        cfg.trials = t;
    }
    if let Some(n) = s.nmax {
        cfg.nmax = n.max(1);
    }
    cfg
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::ConvexCertified | Status::PositivitySampled => 0,
        Status::NotConvex | Status::DegreeObstruction => 1,
        Status::Inconclusive => 3,
    }
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Hessian { poly, direction } => {
            let p = load_poly(poly)?;
            let q = match direction {
                Dir::X => partial_hessian_x(&p)?,
                Dir::A => partial_hessian_a(&p)?,
            };
            let text = q.to_string();
            Ok(Output::ok(json!({ "hessian": text })).with_pretty(text))
        }
        Command::Middlematrix {
            poly,
            full,
            derived,
        } => {
            let p = load_poly(poly)?;
            let mode = if *full { BorderMode::Full } else { BorderMode::Reduced };
            let mut m = middle_matrix_of(&partial_hessian_x(&p)?, mode)?;
            if *derived {
                m = m.derived();
            }
            Ok(Output::ok(to_json(&m)).with_pretty(m.to_string()))
        }
        Command::Congruence {
            poly,
            verify_numeric,
            samples,
            seed,
        } => {
            let p = load_poly(poly)?;
            let m = middle_matrix_of(&partial_hessian_x(&p)?, BorderMode::Reduced)?;
            let data = congruence(&m)?;
            let check = data.verify(&m)?;
            let mut out = json!({
                "congruence": to_json(&data),
                "checks": to_json(&check),
                "nilpotency_index": data.nilpotency_index(),
            });
            let mut ok = check.all();
            if *verify_numeric {
                let derived = m.derived();
                let v = p.vars();
                let mut worst = 0.0f64;
                for s in 0..*samples {
                    let n = 1 + s % 4;
                    let pt = DomainSpec::ALL.sample(v.ga, v.gx, n, seed.wrapping_add(s as u64));
                    let b = eval_matrixpoly(&data.b, &pt)?;
                    let z = eval_matrixpoly(m.z(), &pt)?;
                    let d = eval_matrixpoly(derived.z(), &pt)?;
                    let lhs = b.transpose() * z * b;
                    let scale = d.amax().max(1.0);
                    worst = worst.max((lhs - &d).amax() / scale);
                }
                ok &= worst <= 1e-8;
                out["numeric_residual"] = json!(worst);
                out["samples"] = json!(samples);
            }
            Ok(Output {
                json: out,
                pretty: None,
                code: if ok { 0 } else { 1 },
            })
        }
        Command::Convexity {
            poly,
            mode,
            domain,
            a_domain,
            sampling,
            certify,
        } => {
            let p = load_poly(poly)?;
            let dom = DomainSpec {
                a: parse_domain(a_domain)?,
                x: parse_domain(domain)?,
            };
            let cfg = sampling_config(&p, sampling, dom);
            if *certify {
                let v = certify_convex_in_x(&p)?;
                if v.status == Status::ConvexCertified {
                    return Ok(Output {
                        json: to_json(&v),
                        pretty: None,
                        code: 0,
                    });
                }
            }
            let v = match mode {
                Mode::Midpoint => midpoint_convexity_test(&p, &cfg)?,
                Mode::Hessian => hessian_positivity_test(&p, &cfg)?,
            };
            Ok(Output {
                json: to_json(&v),
                pretty: None,
                code: status_code(v.status),
            })
        }
        Command::Decompose {
            poly,
            form,
            a_domain,
            samples,
            seed,
        } => {
            let p = load_poly(poly)?;
            let d = match form {
                Form::XConvex => {
                    let dom = DomainSpec {
                        a: parse_domain(a_domain)?,
                        x: DomainKind::All,
                    };
                    decompose_convex_in_x(&p, &dom, *samples, *seed)?
                }
                Form::Separate => decompose_separately_convex(&p, cli.tol)?,
                Form::ConvexConcave => decompose_convex_concave(&p, cli.tol)?,
                Form::LocalRq => local_rq_form(&p, *samples, *seed)?,
            };
            Ok(Output::ok(to_json(&d)))
        }
        Command::Signature {
            poly,
            x_zero,
            point,
            sampling,
        } => {
            let p = load_poly(poly)?;
            if let Some(path) = point {
                let pt = read_point(path)?;
                return Ok(Output::ok(to_json(&signature_at(&p, &pt)?)));
            }
            let nmax = sampling.nmax.unwrap_or(4);
            let trials = sampling.trials.unwrap_or(100);
            let est = signature_estimate(&p, *x_zero, nmax, trials, sampling.seed)?;
            Ok(Output::ok(to_json(&est)))
        }
        Command::Chsy {
            monomials,
            point,
            vector,
            ga,
            gx,
            n,
            seed,
        } => {
            let pt = match point {
                Some(path) => read_point(path)?,
                None => DomainSpec::ALL.sample(*ga, *gx, *n, *seed),
            };
            let vars = VarCounts::new(pt.a.len(), pt.x.len());
            let words = monomials
                .split(',')
                .map(|w| parse_word(w.trim(), vars))
                .collect::<Result<Vec<_>, _>>()?;
            let v = match vector {
                Some(s) => DVector::from_vec(
                    s.split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Failure::Usage(format!("bad vector: {e}")))?,
                ),
                None => random_vector(pt.dim(), seed.wrapping_add(1)),
            };
            let r = chsy_codimension(&pt, &v, &words)?;
            Ok(Output::ok(to_json(&r)))
        }
        Command::RankProbe { poly, sampling } => {
            let p = load_poly(poly)?;
            let rows = generic_rank_probe(
                &p,
                sampling.nmax.unwrap_or(6),
                sampling.trials.unwrap_or(20),
                sampling.seed,
            )?;
            Ok(Output::ok(to_json(&rows)))
        }
        Command::Ngd { g, d } => {
            let v = ngd(*g, *d);
            Ok(Output::ok(json!(v)).with_pretty(v.to_string()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let text = match (cli.format, out.pretty) {
                (Format::Pretty, Some(p)) => p,
                (Format::Pretty, None) => serde_json::to_string_pretty(&out.json).expect("json"),
                (Format::Json, _) => out.json.to_string(),
            };
            println!("{text}");
            ExitCode::from(out.code)
        }
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Negative(m) => (1, m),
                Failure::Inconclusive(m) => (3, m),
            };
            eprintln!("ncx: {msg}");
            ExitCode::from(code)
        }
    }
}
