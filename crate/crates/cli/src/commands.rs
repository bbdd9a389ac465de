use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use segguard_core::lp::Sense;
use segguard_core::{
    best_case_cs, best_case_weighted, classify, classify_weighted, compute_bounds,
    construct_cs_improving, construct_cs_reducing, evaluate, greedy_decompose, profile_polytope,
    worst_case_cs, worst_case_weighted, Bounds, Classification, Database, Error, Market,
    OracleResult, PriceIndex, Rational, Segmentation, SegmentationOutcome, ValuationGrid,
};
use serde_json::{json, Map, Value};

use crate::render::{align, dec, dec_text, exact, price, rationals, Doc};
use crate::{
    load_database, load_market, oracle_config, Cli, CliError, CliResult, Command, Direction,
    Format, Report, EXIT_CONSTRUCTOR, EXIT_MISMATCH, EXIT_NOT_WC, EXIT_OK, EXIT_VALIDATION,
};

pub(crate) fn dispatch(cli: &Cli) -> CliResult<Report> {
    let (doc, code, note, default) = match &cli.command {
        Command::Analyze { market } => {
            let m = load_market(market)?;
            (analyze(&m)?, EXIT_OK, None, Format::Json)
        }
        Command::Segment { market } => {
            let m = load_market(market)?;
            let (doc, ok) = segment(&m);
            let code = if ok { EXIT_OK } else { EXIT_MISMATCH };
            (
                doc,
                code,
                (!ok).then(|| "decomposition does not reproduce the market".into()),
                Format::Json,
            )
        }
        Command::Classify {
            market,
            database,
            alpha,
        } => {
            let (m, f) = (load_market(market)?, load_database(database)?);
            let (doc, c) = classify_cmd(&m, &f, alpha.as_ref())?;
            let code = if c.in_wc { EXIT_OK } else { EXIT_NOT_WC };
            (doc, code, None, Format::Json)
        }
        Command::Witness {
            market,
            database,
            direction,
            label,
            epsilon,
        } => {
            let (m, f) = (load_market(market)?, load_database(database)?);
            (
                witness(&m, &f, *direction, *label, epsilon.as_ref())?,
                EXIT_OK,
                None,
                Format::Json,
            )
        }
        Command::Verify {
            market,
            database,
            alpha,
        } => {
            let (m, f) = (load_market(market)?, load_database(database)?);
            let (doc, failed) = verify(&m, &f, alpha.as_ref())?;
            let code = if failed == 0 { EXIT_OK } else { EXIT_MISMATCH };
            let note = (failed > 0).then(|| format!("{failed} check(s) failed"));
            (doc, code, note, Format::Json)
        }
        Command::Sweep { x3_steps } => (sweep(*x3_steps)?, EXIT_OK, None, Format::Csv),
        Command::Triangle {
            market,
            database,
            samples,
            seed,
        } => {
            let (m, f) = (load_market(market)?, load_database(database)?);
            let (doc, ok) = triangle(&m, &f, *samples, *seed)?;
            let code = if ok { EXIT_OK } else { EXIT_MISMATCH };
            (
                doc,
                code,
                (!ok).then(|| "a sampled point violates the surplus bounds".into()),
                Format::Csv,
            )
        }
    };
    Ok(Report {
        text: doc.render(cli.format.unwrap_or(default))?,
        code,
        note,
    })
}

fn record(pairs: Vec<(&str, Value)>) -> Doc {
    Doc::Record(
        pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect::<Map<_, _>>(),
    )
}

fn analyze(m: &Market) -> CliResult<Doc> {
    let b = compute_bounds(m)?;
    let report = serde_json::to_value(b.report(m)).expect("report serializes");
    let Value::Object(map) = report else {
        unreachable!("report is a struct")
    };
    Ok(Doc::Record(map))
}

fn support_label(m: &Market, indices: &[usize]) -> String {
    let vals: Vec<String> = indices
        .iter()
        .map(|&i| m.grid().value(PriceIndex(i)).to_string())
        .collect();
    format!("{{{}}}", vals.join(","))
}

/// Decomposition table; the flag reports whether the steps recombine to the
/// input exactly.
fn segment(m: &Market) -> (Doc, bool) {
    let d = greedy_decompose(m);
    let ok = d.recombine() == m.masses();
    let mut headers = vec!["extreme_market".to_string()];
    headers.extend(m.values().iter().map(|v| format!("v={v}")));
    headers.push("mass".into());
    let mut rows = Vec::new();
    let mut steps = Vec::new();
    for step in &d.steps {
        let support = support_label(m, step.extreme.support.indices());
        let mut row = vec![support.clone()];
        row.extend(step.extreme.market.masses().iter().map(|x| x.to_string()));
        row.push(step.mass.to_string());
        rows.push(row);
        steps.push(json!({
            "support": support
                .trim_matches(|c| c == '{' || c == '}')
                .split(',')
                .map(String::from)
                .collect::<Vec<_>>(),
            "masses": rationals(step.extreme.market.masses()),
            "mass": exact(&step.mass),
            "mass_dec": dec(&step.mass),
        }));
    }
    let json = json!({
        "valuations": rationals(m.values()),
        "steps": steps,
        "identity_holds": ok,
    });
    (
        Doc::Rows {
            json,
            headers,
            rows,
        },
        ok,
    )
}

fn bounds_fields(b: &Bounds) -> Vec<(&'static str, Value)> {
    vec![
        ("lambda_lower", exact(&b.lambda_lower)),
        ("lambda_lower_dec", dec(&b.lambda_lower)),
        ("lambda_upper", exact(&b.lambda_upper)),
        ("lambda_upper_dec", dec(&b.lambda_upper)),
    ]
}

fn classification_fields(c: &Classification) -> Vec<(&'static str, Value)> {
    vec![
        ("in_wc", json!(c.in_wc)),
        ("in_f2", json!(c.in_f2)),
        ("undominated", json!(c.undominated)),
        ("binding_label", json!(c.binding_label.map(|s| s + 1))),
    ]
}

fn classify_cmd(
    m: &Market,
    f: &Database,
    alpha: Option<&Rational>,
) -> CliResult<(Doc, Classification)> {
    let b = compute_bounds(m)?;
    let c = match alpha {
        Some(a) => classify_weighted(m, f, a)?,
        None => classify(m, f)?,
    };
    let mut pairs = classification_fields(&c);
    pairs.push(("min_mass", exact(f.min_mass())));
    pairs.extend(bounds_fields(&b));
    pairs.push(("alpha", alpha.map_or(Value::Null, exact)));
    Ok((record(pairs), c))
}

fn constructor_error(e: Error) -> CliError {
    match e {
        Error::UniformPriceAtTop => e.into(),
        other => CliError::new(EXIT_CONSTRUCTOR, other.to_string()),
    }
}

fn outcome_json(m: &Market, o: &SegmentationOutcome) -> Value {
    json!({
        "prices": o.prices.iter().map(|&p| price(m, p)).collect::<Vec<_>>(),
        "cs": exact(&o.cs),
        "cs_dec": dec(&o.cs),
        "ps": exact(&o.ps),
        "ps_dec": dec(&o.ps),
    })
}

fn segmentation_rows(
    m: &Market,
    seg: &Segmentation,
    o: &SegmentationOutcome,
) -> (Vec<String>, Vec<Vec<String>>) {
    let mut headers = vec!["label".to_string(), "mass".to_string()];
    headers.extend(m.values().iter().map(|v| format!("v={v}")));
    headers.push("price".into());
    let rows = seg
        .conditionals()
        .iter()
        .enumerate()
        .map(|(s, c)| {
            let mut row = vec![(s + 1).to_string(), seg.database().mass(s).to_string()];
            row.extend(c.masses().iter().map(|x| x.to_string()));
            row.push(m.grid().value(o.prices[s]).to_string());
            row
        })
        .collect();
    (headers, rows)
}

fn witness(
    m: &Market,
    f: &Database,
    direction: Direction,
    label: usize,
    epsilon: Option<&Rational>,
) -> CliResult<Doc> {
    if label == 0 {
        return Err(CliError::new(EXIT_VALIDATION, "labels are one-based"));
    }
    let s = label - 1;
    let b = compute_bounds(m)?;
    let (seg, low_price, eps) = match direction {
        Direction::Reduce => {
            if epsilon.is_some() {
                return Err(CliError::new(
                    EXIT_VALIDATION,
                    "--epsilon applies to --direction improve only",
                ));
            }
            (
                construct_cs_reducing(m, f, s).map_err(constructor_error)?,
                None,
                None,
            )
        }
        Direction::Improve => {
            let w = construct_cs_improving(m, f, s, epsilon).map_err(constructor_error)?;
            (w.segmentation, Some(w.low_price), w.epsilon)
        }
    };
    let o = evaluate(m, &seg)?;
    let strict = match direction {
        Direction::Reduce => o.cs < b.u_star,
        Direction::Improve => o.cs > b.u_star && o.ps > b.pi_star,
    };
    if !strict {
        return Err(CliError::new(
            EXIT_MISMATCH,
            format!(
                "witness is not strict: cs {} ps {} against u* {} pi* {}",
                o.cs, o.ps, b.u_star, b.pi_star
            ),
        ));
    }
    let json = json!({
        "direction": match direction { Direction::Reduce => "reduce", Direction::Improve => "improve" },
        "label": label,
        "segmentation": serde_json::to_value(seg.to_repr()).expect("segmentation serializes"),
        "outcome": outcome_json(m, &o),
        "u_star": exact(&b.u_star),
        "pi_star": exact(&b.pi_star),
        "low_price": low_price.map_or(Value::Null, |p| price(m, p)),
        "epsilon": eps.as_ref().map_or(Value::Null, exact),
    });
    let (headers, rows) = segmentation_rows(m, &seg, &o);
    let mut table = align(&headers, &rows);
    table.push_str(&format!(
        "cs {} (u* {})  ps {} (pi* {})\n",
        o.cs, b.u_star, o.ps, b.pi_star
    ));
    Ok(Doc::Custom {
        json,
        headers,
        rows,
        table,
    })
}

fn oracle_json(m: &Market, r: &OracleResult) -> Value {
    json!({
        "value": exact(&r.value),
        "value_dec": dec(&r.value),
        "profile": r.profile.iter().map(|&p| price(m, p)).collect::<Vec<_>>(),
        "achieved": r.achieved,
        "witness_value": exact(&r.witness_value),
        "witness": serde_json::to_value(r.witness.to_repr()).expect("segmentation serializes"),
        "profiles_enumerated": r.profiles_enumerated,
        "lps_solved": r.lps_solved,
    })
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Runs the oracle and compares it with the closed-form classification.
/// Returns the document and the number of failed checks.
fn verify(m: &Market, f: &Database, alpha: Option<&Rational>) -> CliResult<(Doc, usize)> {
    let cfg = oracle_config()?;
    let b = compute_bounds(m)?;
    let c = classify(m, f)?;
    let worst = worst_case_cs(m, f, &cfg)?;
    let best = best_case_cs(m, f, &cfg)?;
    let mut checks = Vec::new();

    checks.push(Check {
        name: "worst_case",
        pass: if c.in_wc {
            worst.value == b.u_star
        } else {
            worst.value < b.u_star
        },
        detail: format!(
            "inf cs {} vs u* {}; in_wc {}",
            worst.value, b.u_star, c.in_wc
        ),
    });
    if c.in_wc {
        let improves = best.value > b.u_star;
        let witnessed = !improves
            || best
                .witness_exceeding(m, &b.u_star)
                .and_then(|w| evaluate(m, &w).ok())
                .is_some_and(|o| o.cs > b.u_star);
        checks.push(Check {
            name: "best_case",
            pass: improves == c.in_f2 && witnessed,
            detail: format!(
                "sup cs {} vs u* {}; in_f2 {}; achieved {}",
                best.value, b.u_star, c.in_f2, best.achieved
            ),
        });
        let stats = [&worst, &best]
            .iter()
            .filter_map(|r| r.vertex_stats.clone())
            .reduce(|a, b| segguard_core::oracle::VertexStats {
                max_price: a.max_price.max(b.max_price),
                min_ps: a.min_ps.min(b.min_ps),
            });
        if let Some(st) = stats {
            checks.push(Check {
                name: "vertex_prices",
                pass: st.max_price <= b.i_star,
                detail: format!(
                    "highest vertex price {} vs uniform {}",
                    m.grid().value(st.max_price),
                    m.grid().value(b.i_star)
                ),
            });
            checks.push(Check {
                name: "vertex_producer_surplus",
                pass: st.min_ps >= b.pi_star,
                detail: format!("lowest vertex ps {} vs pi* {}", st.min_ps, b.pi_star),
            });
        }
    }

    let mut weighted = Value::Null;
    if let Some(a) = alpha {
        let cw = classify_weighted(m, f, a)?;
        let w_star = a * &b.u_star + (Rational::one() - a) * &b.pi_star;
        let ww = worst_case_weighted(m, f, a, &cfg)?;
        checks.push(Check {
            name: "weighted_worst_case",
            pass: if cw.in_wc {
                ww.value == w_star
            } else {
                ww.value < w_star
            },
            detail: format!("inf w {} vs w* {}; in_wc {}", ww.value, w_star, cw.in_wc),
        });
        let mut best_w = Value::Null;
        if cw.in_wc {
            let bw = best_case_weighted(m, f, a, &cfg)?;
            checks.push(Check {
                name: "weighted_best_case",
                pass: (bw.value > w_star) == cw.in_f2,
                detail: format!("sup w {} vs w* {}; in_f2 {}", bw.value, w_star, cw.in_f2),
            });
            best_w = oracle_json(m, &bw);
        }
        weighted = json!({
            "alpha": exact(a),
            "w_star": exact(&w_star),
            "worst": oracle_json(m, &ww),
            "best": best_w,
        });
    }

    let failed = checks.iter().filter(|c| !c.pass).count();
    let status = |c: &Check| if c.pass { "PASS" } else { "FAIL" };
    let rows: Vec<Vec<String>> = checks
        .iter()
        .map(|c| vec![status(c).to_string(), c.name.to_string(), c.detail.clone()])
        .collect();
    let json = json!({
        "checks": checks.iter().map(|c| json!({"check": c.name, "status": status(c), "detail": c.detail})).collect::<Vec<_>>(),
        "u_star": exact(&b.u_star),
        "pi_star": exact(&b.pi_star),
        "classification": Value::Object(classification_fields(&c).into_iter().map(|(k, v)| (k.to_string(), v)).collect()),
        "worst": oracle_json(m, &worst),
        "best": oracle_json(m, &best),
        "weighted": weighted,
    });
    let headers = vec![
        "status".to_string(),
        "check".to_string(),
        "detail".to_string(),
    ];
    let table = align(&[], &rows);
    Ok((
        Doc::Custom {
            json,
            headers,
            rows,
            table,
        },
        failed,
    ))
}

/// Market `(2/5, 3/5 - x3, x3)` on `{1, 2, 3}`.
pub fn sweep_market(x3: &Rational) -> Market {
    Market::new(
        ValuationGrid::integers(3).expect("three points"),
        vec![Rational::new(2, 5), Rational::new(3, 5) - x3, x3.clone()],
    )
    .expect("x3 in (0, 1/10]")
}

fn sweep(steps: u32) -> CliResult<Doc> {
    if steps < 2 {
        return Err(CliError::new(
            EXIT_VALIDATION,
            "--x3-steps must be at least 2",
        ));
    }
    let headers: Vec<String> = [
        "x3",
        "x3_dec",
        "lambda_lower",
        "lambda_lower_dec",
        "uniform_price",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for j in 1..=i64::from(steps) {
        let x3 = Rational::new(j, 10 * i64::from(steps));
        let m = sweep_market(&x3);
        let b = compute_bounds(&m)?;
        let p = m.grid().value(b.i_star);
        rows.push(vec![
            x3.to_string(),
            dec_text(&x3),
            b.lambda_lower.to_string(),
            dec_text(&b.lambda_lower),
            p.to_string(),
        ]);
        points.push(json!({
            "x3": exact(&x3),
            "x3_dec": dec(&x3),
            "lambda_lower": exact(&b.lambda_lower),
            "lambda_lower_dec": dec(&b.lambda_lower),
            "uniform_price": exact(p),
        }));
    }
    Ok(Doc::Rows {
        json: Value::Array(points),
        headers,
        rows,
    })
}

/// Sampled surplus pairs. The flag is false when a point breaks the
/// surplus bounds that hold for every feasible segmentation.
fn triangle(m: &Market, f: &Database, samples: usize, seed: u64) -> CliResult<(Doc, bool)> {
    let b = compute_bounds(m)?;
    let c = classify(m, f)?;
    let mut points: Vec<(&'static str, Rational, Rational)> =
        vec![("uniform", b.pi_star.clone(), b.u_star.clone())];

    if let Some(s) = f.masses().iter().position(|x| *x <= b.lambda_lower) {
        if let Ok(seg) = construct_cs_reducing(m, f, s) {
            let o = evaluate(m, &seg)?;
            points.push(("reducing", o.ps, o.cs));
        }
    }
    if c.in_f2 {
        let s = c.binding_label.expect("qualifying label");
        if let Ok(w) = construct_cs_improving(m, f, s, None) {
            let o = evaluate(m, &w.segmentation)?;
            points.push(("improving", o.ps, o.cs));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = m.support().last().map_or(m.len(), |&t| t + 1);
    let nv = f.len() * m.len();
    let mut found = 0;
    let mut attempts = 0;
    while found < samples && attempts < samples.saturating_mul(20).max(20) {
        attempts += 1;
        let profile: Vec<PriceIndex> = (0..f.len())
            .map(|_| PriceIndex(rng.gen_range(0..base)))
            .collect();
        let coeffs: Vec<Rational> = (0..nv)
            .map(|_| Rational::from_integer(rng.gen_range(-5..=5)))
            .collect();
        let mut lp = profile_polytope(m, f, &profile)?;
        lp.set_objective(coeffs);
        lp.set_sense(Sense::Maximize);
        let Ok(sol) = lp.solve() else { continue };
        let k = m.len();
        let conditionals = (0..f.len())
            .map(|s| Market::new(m.grid().clone(), sol.point[s * k..(s + 1) * k].to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let o = evaluate(m, &Segmentation::new(f.clone(), conditionals)?)?;
        points.push(("sample", o.ps, o.cs));
        found += 1;
    }

    let total: Rational = m.served_value(PriceIndex(0));
    let mut seen = BTreeSet::new();
    let mut ok = true;
    let mut rows = Vec::new();
    let mut json_points = Vec::new();
    for (source, ps, cs) in points {
        if !seen.insert((ps.clone(), cs.clone())) {
            continue;
        }
        ok &= !cs.is_negative() && &cs + &ps <= total && (!c.in_wc || ps >= b.pi_star);
        rows.push(vec![
            source.to_string(),
            ps.to_string(),
            dec_text(&ps),
            cs.to_string(),
            dec_text(&cs),
        ]);
        json_points.push(json!({
            "source": source,
            "ps": exact(&ps),
            "ps_dec": dec(&ps),
            "cs": exact(&cs),
            "cs_dec": dec(&cs),
        }));
    }
    let headers = ["source", "ps", "ps_dec", "cs", "cs_dec"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    Ok((
        Doc::Rows {
            json: Value::Array(json_points),
            headers,
            rows,
        },
        ok,
    ))
}
