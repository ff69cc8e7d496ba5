use serde_json::{json, Value};

use resgap_core::arithfn::{ArithError, ArithTables};
use resgap_core::bound::{
    gap_lower_bound, minimize_phi, BoundError, BoundParams, PhiScan, PhiSearch, WeightPolynomial,
    DEFAULT_TOL,
};
use resgap_core::optimize::{optimize_weights, SearchSpec};
use resgap_core::oracle::{self, OracleError, OracleInstance, OracleResult};
use resgap_core::zeros::{self, ZeroTableError, DEFAULT_BIN_WIDTH};

use crate::config::Settings;
use crate::exit::{self, Failure};
use crate::output::{emit, list, num, opt_num, Format, Report, Table};
use crate::{Command, Common, ZerosCommand};

const SHARED_KEYS: [&str; 2] = ["format", "threads"];

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result types serialize")
}

fn bound_failure(e: BoundError) -> Failure {
    match e {
        BoundError::Quadrature(q) => Failure::numerical(q.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

fn oracle_failure(e: OracleError) -> Failure {
    match e {
        OracleError::Bound(b) => bound_failure(b),
        other => Failure::usage(other.to_string()),
    }
}

fn zeros_failure(e: ZeroTableError) -> Failure {
    match e {
        ZeroTableError::Io { .. } => Failure::no_input(e.to_string()),
        ZeroTableError::InvalidParameter(_) => Failure::usage(e.to_string()),
        _ => Failure::data(e.to_string()),
    }
}

/// Loads the config file and overlays the flags given on the command line.
fn settings(common: &Common, flags: &[(&str, Option<&String>)]) -> Result<Settings, Failure> {
    let mut s = match &common.config {
        Some(path) => Settings::read(path)?,
        None => Settings::default(),
    };
    s.set("format", common.format.as_ref());
    s.set("threads", common.threads.as_ref());
    for (k, v) in flags {
        s.set(k, *v);
    }
    Ok(s)
}

fn finish(s: &mut Settings, known: &[&str]) -> Result<Format, Failure> {
    s.set_default("format", "json");
    let all: Vec<&str> = known.iter().chain(SHARED_KEYS.iter()).copied().collect();
    s.check_keys(&all)?;
    let threads = match s.get_opt::<usize>("threads")? {
        Some(n) => Some(n),
        None => match std::env::var("RESGAP_THREADS") {
            Ok(v) if !v.trim().is_empty() => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| Failure::usage(format!("invalid RESGAP_THREADS = {v:?}: {e}")))?,
            ),
            _ => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::usage("threads must be at least 1"));
        }
        // fails only if a pool already exists, which cannot happen before the first command
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    s.get("format")
}

fn weight(s: &Settings) -> Result<WeightPolynomial, Failure> {
    WeightPolynomial::new(s.get_list("coeffs")?).map_err(bound_failure)
}

pub fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Bound {
            common,
            phi,
            ell,
            coeffs,
            tol,
        } => {
            let mut s = settings(
                &common,
                &[
                    ("phi", phi.as_ref()),
                    ("ell", ell.as_ref()),
                    ("coeffs", coeffs.as_ref()),
                    ("tol", tol.as_ref()),
                ],
            )?;
            s.set_default("phi", 0.508949);
            s.set_default("ell", 1.15);
            s.set_default("coeffs", "1,-0.7");
            s.set_default("tol", DEFAULT_TOL);
            let format = finish(&mut s, &["phi", "ell", "coeffs", "tol"])?;
            cmd_bound(&s, format)
        }
        Command::Minimize {
            common,
            ell,
            coeffs,
            range,
            step,
            tol_phi,
            tol,
        } => {
            let mut s = settings(
                &common,
                &[
                    ("ell", ell.as_ref()),
                    ("coeffs", coeffs.as_ref()),
                    ("range", range.as_ref()),
                    ("step", step.as_ref()),
                    ("tol-phi", tol_phi.as_ref()),
                    ("tol", tol.as_ref()),
                ],
            )?;
            s.set_default("ell", 1.15);
            s.set_default("coeffs", "1,-0.7");
            s.set_default("range", "0.45:0.55");
            s.set_default("step", 0.01);
            s.set_default("tol-phi", 1e-7);
            s.set_default("tol", DEFAULT_TOL);
            let format = finish(
                &mut s,
                &["ell", "coeffs", "range", "step", "tol-phi", "tol"],
            )?;
            cmd_minimize(&s, format)
        }
        Command::Optimize {
            common,
            degree,
            ell_range,
            coeff_range,
            range,
            step,
            budget,
            seed,
            starts,
            initial,
            tol_phi,
            tol,
        } => {
            let mut s = settings(
                &common,
                &[
                    ("degree", degree.as_ref()),
                    ("ell-range", ell_range.as_ref()),
                    ("coeff-range", coeff_range.as_ref()),
                    ("range", range.as_ref()),
                    ("step", step.as_ref()),
                    ("budget", budget.as_ref()),
                    ("seed", seed.as_ref()),
                    ("starts", starts.as_ref()),
                    ("initial", initial.as_ref()),
                    ("tol-phi", tol_phi.as_ref()),
                    ("tol", tol.as_ref()),
                ],
            )?;
            let d = SearchSpec::new(1, 1, 0);
            s.set_default("degree", 2);
            s.set_default(
                "ell-range",
                format!("{}:{}", d.ell_range[0], d.ell_range[1]),
            );
            s.set_default(
                "coeff-range",
                format!("{}:{}", d.coeff_range[0][0], d.coeff_range[0][1]),
            );
            s.set_default("range", format!("{}:{}", d.phi_scan.lo, d.phi_scan.hi));
            s.set_default("step", d.phi_scan.step);
            s.set_default("budget", 200);
            s.set_default("seed", 0);
            s.set_default("starts", d.starts);
            s.set_default("tol-phi", d.tol_phi);
            s.set_default("tol", d.quad_tol);
            let format = finish(
                &mut s,
                &[
                    "degree",
                    "ell-range",
                    "coeff-range",
                    "range",
                    "step",
                    "budget",
                    "seed",
                    "starts",
                    "initial",
                    "tol-phi",
                    "tol",
                ],
            )?;
            cmd_optimize(&s, format)
        }
        Command::Oracle {
            common,
            l,
            t,
            phi,
            ell,
            coeffs,
            tol,
        } => {
            let mut s = settings(
                &common,
                &[
                    ("L", l.as_ref()),
                    ("T", t.as_ref()),
                    ("phi", phi.as_ref()),
                    ("ell", ell.as_ref()),
                    ("coeffs", coeffs.as_ref()),
                    ("tol", tol.as_ref()),
                ],
            )?;
            // tables are the natural output of a length sweep
            s.set_default("format", "csv");
            s.set_default("L", 1000);
            s.set_default("phi", 0.508949);
            s.set_default("ell", 1.15);
            s.set_default("coeffs", "1,-0.7");
            s.set_default("tol", DEFAULT_TOL);
            let format = finish(&mut s, &["L", "T", "phi", "ell", "coeffs", "tol"])?;
            cmd_oracle(&s, format)
        }
        Command::Zeros {
            command:
                ZerosCommand::Stats {
                    common,
                    file,
                    limit,
                    phi,
                    window,
                    bin_width,
                },
        } => {
            let mut s = settings(
                &common,
                &[
                    ("file", file.as_ref()),
                    ("limit", limit.as_ref()),
                    ("phi", phi.as_ref()),
                    ("window", window.as_ref()),
                    ("bin-width", bin_width.as_ref()),
                ],
            )?;
            s.set_default("phi", 0.508949);
            s.set_default("bin-width", DEFAULT_BIN_WIDTH);
            let format = finish(&mut s, &["file", "limit", "phi", "window", "bin-width"])?;
            cmd_zeros_stats(&s, format)
        }
    }
}

fn cmd_bound(s: &Settings, format: Format) -> Result<u8, Failure> {
    let params =
        BoundParams::new(s.get("phi")?, s.get("ell")?, weight(s)?).map_err(bound_failure)?;
    let r = gap_lower_bound(&params, s.get("tol")?).map_err(bound_failure)?;
    let certified = r.is_certified();
    let mut result = to_value(&r);
    result["certification_margin"] = json!(r.certification_margin());
    result["certified"] = json!(certified);
    let row = vec![
        num(params.phi),
        num(params.ell),
        list(params.f.coeffs()),
        num(r.i_f),
        num(r.term1),
        num(r.term2),
        num(r.term3),
        num(r.m_total),
        num(r.g_value),
        num(r.quad_error),
        certified.to_string(),
    ];
    let table = Table {
        header: vec![
            "phi",
            "ell",
            "coeffs",
            "i_f",
            "term1",
            "term2",
            "term3",
            "m_total",
            "g_value",
            "quad_error",
            "certified",
        ],
        rows: vec![row],
    };
    let human = vec![
        ("I_f".into(), num(r.i_f)),
        ("term1".into(), num(r.term1)),
        ("term2".into(), num(r.term2)),
        ("term3".into(), num(r.term3)),
        ("G".into(), num(r.g_value)),
        ("quad_error".into(), num(r.quad_error)),
        ("certified".into(), certified.to_string()),
    ];
    emit(
        &Report {
            command: "bound",
            config: s,
            result,
            table,
            human,
        },
        format,
    )?;
    Ok(if certified {
        exit::SUCCESS
    } else {
        exit::NOT_CERTIFIED
    })
}

fn phi_scan(s: &Settings) -> Result<PhiScan, Failure> {
    let [lo, hi] = s.get_range("range")?;
    PhiScan::new(lo, hi, s.get("step")?).map_err(bound_failure)
}

fn cmd_minimize(s: &Settings, format: Format) -> Result<u8, Failure> {
    let f = weight(s)?;
    let search = minimize_phi(
        s.get("ell")?,
        &f,
        phi_scan(s)?,
        s.get("tol-phi")?,
        s.get("tol")?,
    )
    .map_err(bound_failure)?;
    let (row, human, code) = match &search {
        PhiSearch::Certified {
            phi_star,
            bracket,
            g_at_phi_star,
            quad_error_at_phi_star,
            within_margin,
            evaluations,
        } => (
            vec![
                "certified".to_string(),
                num(*phi_star),
                num(bracket[0]),
                num(bracket[1]),
                num(*g_at_phi_star),
                num(*quad_error_at_phi_star),
                within_margin.to_string(),
                evaluations.to_string(),
            ],
            vec![
                ("phi*".into(), num(*phi_star)),
                (
                    "bracket".into(),
                    format!("[{}, {}]", num(bracket[0]), num(bracket[1])),
                ),
                ("G(phi*)".into(), num(*g_at_phi_star)),
                ("within_margin".into(), within_margin.to_string()),
            ],
            exit::SUCCESS,
        ),
        PhiSearch::NoCertificate {
            reason,
            max_g,
            evaluations,
        } => (
            vec![
                "no_certificate".to_string(),
                String::new(),
                String::new(),
                String::new(),
                num(*max_g),
                String::new(),
                "false".to_string(),
                evaluations.to_string(),
            ],
            vec![
                ("no certificate".into(), reason.clone()),
                ("max G".into(), num(*max_g)),
            ],
            exit::NOT_CERTIFIED,
        ),
    };
    let table = Table {
        header: vec![
            "status",
            "phi_star",
            "bracket_lo",
            "bracket_hi",
            "g",
            "quad_error",
            "within_margin",
            "evaluations",
        ],
        rows: vec![row],
    };
    emit(
        &Report {
            command: "minimize",
            config: s,
            result: to_value(&search),
            table,
            human,
        },
        format,
    )?;
    Ok(code)
}

fn cmd_optimize(s: &Settings, format: Format) -> Result<u8, Failure> {
    let degree: usize = s.get("degree")?;
    let [lo, hi] = s.get_range("range")?;
    let spec = SearchSpec {
        degree,
        ell_range: s.get_range("ell-range")?,
        coeff_range: vec![s.get_range("coeff-range")?],
        phi_scan: PhiScan {
            lo,
            hi,
            step: s.get("step")?,
        },
        budget: s.get("budget")?,
        seed: s.get("seed")?,
        starts: s.get("starts")?,
        tol_phi: s.get("tol-phi")?,
        quad_tol: s.get("tol")?,
        initial: match s.get_str("initial") {
            None | Some("") => None,
            Some(_) => Some(s.get_list("initial")?),
        },
    };
    let report = optimize_weights(&spec).map_err(bound_failure)?;
    let rows = report
        .trace
        .iter()
        .map(|e| {
            vec![
                e.iteration.to_string(),
                e.start.to_string(),
                num(e.ell),
                list(&e.coeffs),
                opt_num(e.phi_star),
                num(e.objective),
            ]
        })
        .collect();
    let table = Table {
        header: vec![
            "iteration",
            "start",
            "ell",
            "coeffs",
            "phi_star",
            "objective",
        ],
        rows,
    };
    let mut human = vec![
        ("evaluations".into(), report.evaluations.to_string()),
        ("successes".into(), report.successes().count().to_string()),
        ("best phi*".into(), opt_num(report.best_phi_star)),
    ];
    if let Some(p) = &report.best_params {
        human.push(("best ell".into(), num(p.ell)));
        human.push(("best coeffs".into(), list(p.f.coeffs())));
    }
    let code = if report.best_phi_star.is_some() {
        exit::SUCCESS
    } else {
        exit::NOT_CERTIFIED
    };
    emit(
        &Report {
            command: "optimize",
            config: s,
            result: to_value(&report),
            table,
            human,
        },
        format,
    )?;
    Ok(code)
}

fn oracle_row(r: &OracleResult, inst: &OracleInstance) -> Vec<String> {
    vec![
        r.l.to_string(),
        num(inst.phi),
        num(inst.ell),
        list(inst.f.coeffs()),
        num(r.t),
        num(r.h),
        format!("{:?}", r.mode).to_lowercase(),
        num(r.sum1),
        num(r.sum2),
        num(r.sum3),
        num(r.normalizer),
        num(r.ratio),
        num(r.afh_prediction),
        num(r.discrepancy),
        num(r.ratio_band[0]),
        num(r.ratio_band[1]),
    ]
}

fn cmd_oracle(s: &Settings, format: Format) -> Result<u8, Failure> {
    let lengths: Vec<usize> = s
        .get_str("L")
        .unwrap_or_default()
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<usize>()
                .map_err(|e| Failure::usage(format!("invalid L entry {x:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let phi: f64 = s.get("phi")?;
    let ell: f64 = s.get("ell")?;
    let f = weight(s)?;
    let tol: f64 = s.get("tol")?;
    let t: Option<f64> = s.get_opt("T")?;
    if t.is_some() && lengths.len() != 1 {
        return Err(Failure::usage("T can only be given with a single L"));
    }
    let instances = lengths
        .iter()
        .map(|&l| match t {
            Some(t) => OracleInstance::with_height(l, t, phi, ell, f.clone()),
            None => OracleInstance::on_ray(l, phi, ell, f.clone()),
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(oracle_failure)?;
    let max_l = lengths.iter().copied().max().unwrap_or(1);
    let tables =
        ArithTables::build(max_l).map_err(|e: ArithError| Failure::usage(e.to_string()))?;
    let study = oracle::convergence_study(&instances, &tables, tol).map_err(oracle_failure)?;

    let rows = study
        .rows
        .iter()
        .zip(&instances)
        .map(|(r, i)| oracle_row(r, i))
        .collect();
    let table = Table {
        header: vec![
            "L",
            "phi",
            "ell",
            "coeffs",
            "T",
            "h",
            "mode",
            "sum1",
            "sum2",
            "sum3",
            "normalizer",
            "ratio",
            "prediction",
            "discrepancy",
            "ratio_band_lo",
            "ratio_band_hi",
        ],
        rows,
    };
    let mut human: Vec<(String, String)> = study
        .rows
        .iter()
        .map(|r| {
            (
                format!("L={}", r.l),
                format!(
                    "ratio {}  prediction {}  discrepancy {}",
                    num(r.ratio),
                    num(r.afh_prediction),
                    num(r.discrepancy)
                ),
            )
        })
        .collect();
    if let Some(flag) = study.discrepancy_non_increasing {
        human.push(("non-increasing".into(), flag.to_string()));
    }
    if let Some(fit) = study.fit {
        human.push((
            "fit A/log L + B h".into(),
            format!(
                "A {}  B {}  relative residual {}",
                num(fit.a),
                num(fit.b),
                num(fit.relative_residual)
            ),
        ));
    }
    emit(
        &Report {
            command: "oracle",
            config: s,
            result: to_value(&study),
            table,
            human,
        },
        format,
    )?;
    Ok(exit::SUCCESS)
}

fn cmd_zeros_stats(s: &Settings, format: Format) -> Result<u8, Failure> {
    let path = s
        .get_str("file")
        .filter(|p| !p.is_empty())
        .ok_or_else(|| Failure::usage("zeros stats needs --file"))?;
    let limit: Option<usize> = s.get_opt("limit")?;
    let table = zeros::parse_zero_table(path, limit).map_err(zeros_failure)?;
    let window = match s.get_str("window") {
        None | Some("") => [table.ordinates()[0], table.coverage().1],
        Some(_) => s.get_range("window")?,
    };
    let stats = zeros::gap_stats(&table, window, s.get("phi")?, s.get("bin-width")?)
        .map_err(zeros_failure)?;
    let row = vec![
        num(stats.window[0]),
        num(stats.window[1]),
        num(stats.phi),
        stats.zeros_in_window.to_string(),
        stats.gap_count.to_string(),
        num(stats.min_normalized_gap),
        stats.argmin[0].to_string(),
        stats.argmin[1].to_string(),
        num(stats.mean_normalized_gap),
        num(stats.mean_density_normalized_gap),
        num(stats.sup_nh2_minus_nh),
        opt_num(stats.sup_at.map(|a| a[0])),
        opt_num(stats.sup_at.map(|a| a[1])),
    ];
    let out_table = Table {
        header: vec![
            "window_lo",
            "window_hi",
            "phi",
            "zeros",
            "gaps",
            "min_normalized_gap",
            "argmin_lo",
            "argmin_hi",
            "mean_normalized_gap",
            "mean_density_normalized_gap",
            "sup_nh2_minus_nh",
            "sup_t",
            "sup_h",
        ],
        rows: vec![row],
    };
    let human = vec![
        ("zeros".into(), stats.zeros_in_window.to_string()),
        (
            "min normalized gap".into(),
            format!("{} at {:?}", num(stats.min_normalized_gap), stats.argmin),
        ),
        ("mean normalized gap".into(), num(stats.mean_normalized_gap)),
        (
            "mean (local density)".into(),
            num(stats.mean_density_normalized_gap),
        ),
        ("sup N_h^2 - N_h".into(), num(stats.sup_nh2_minus_nh)),
    ];
    emit(
        &Report {
            command: "zeros stats",
            config: s,
            result: to_value(&stats),
            table: out_table,
            human,
        },
        format,
    )?;
    Ok(exit::SUCCESS)
}
