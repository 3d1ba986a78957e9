use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use geoproj::atypical::{detect_strongly_special, trace_intersection, DetectorBudget, IntersectionOptions, Verdict};
use geoproj::geodesics::{canonicalize, conjugate_geodesic, locus, Endpoint, GeodesicLocus, GeodesicMatrix};
use geoproj::modpoly::{default_cache_dir, ModularCache, DEFAULT_MAX_LEVEL};
use geoproj::modular_forms::{j_eval_with_derivative, j_inverse, UpperHalfPoint};
use geoproj::numeric::{parse_rational, PrecisionComplex, RationalMatrix2};
use geoproj::real_curves::{branches_to_json, build_zn, certify_special_geodesic_point, trace_zn, ZnTraceOptions};
use geoproj::restriction::{weil_restrict, ComplexPlaneCurve};
use geoproj::tracer::{BoundingBox, TracedBranch};
use geoproj::Error;
use rug::Float;
use serde_json::{json, Value};

use crate::svg::{color, document, Panel, Viewport};
use crate::{Cli, Command, DetectArgs, Format, GeodesicOp, IntersectArgs, TraceKind, ZnOp, ZnTraceArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_BUDGET: u8 = 2;
pub const EXIT_NO_SEEDS: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;
pub const EXIT_USAGE: u8 = 64;

/// Bad command-line input discovered after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::LevelTooLarge { .. } | Error::PrecisionExhausted { .. }) => EXIT_BUDGET,
        Some(Error::NoSeeds(_)) => EXIT_NO_SEEDS,
        Some(
            Error::HorizontalVertical
            | Error::NotInUpperHalfPlane
            | Error::InvalidGeodesic(_)
            | Error::InvalidDiscriminant(_)
            | Error::SingularMatrix
            | Error::Precondition(_)
            | Error::Dimension(_)
            | Error::Parse(_)
            | Error::Json(_),
        ) => EXIT_USAGE,
        _ => EXIT_NEGATIVE,
    }
}

/// Decimal string with as many digits as the precision carries.
fn dec(x: &Float) -> String {
    let digits = ((x.prec() as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize;
    x.to_string_radix(10, Some(digits))
}

fn complex_json(z: &PrecisionComplex) -> Value {
    json!({ "re": dec(z.re()), "im": dec(z.im()) })
}

fn complex_text(z: &PrecisionComplex) -> String {
    let im = z.im();
    if im.is_sign_negative() {
        format!("{} - {}i", dec(z.re()), dec(&Float::with_val(im.prec(), -im)))
    } else {
        format!("{} + {}i", dec(z.re()), dec(im))
    }
}

fn parse_float(s: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(s.trim()).map_err(|e| usage(format!("cannot parse {s:?} as a number: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(p) => write_file(p, text),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cache(cli: &Cli, at_least: u32) -> ModularCache {
    let level = cli.max_level.unwrap_or(DEFAULT_MAX_LEVEL.max(at_least));
    ModularCache::new(default_cache_dir()).with_max_level(level)
}

fn tol(cli: &Cli, default: f64) -> Result<f64> {
    let t = cli.tol.unwrap_or(default);
    if !(t > 0.0) || !t.is_finite() {
        return Err(usage("--tol must be positive"));
    }
    Ok(t)
}

fn load_curve(path: &Path) -> Result<ComplexPlaneCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| usage(format!("{} is not JSON: {e}", path.display())))?;
    Ok(ComplexPlaneCurve::from_json_value(&v)?)
}

fn plane_box(b: &[f64]) -> Result<BoundingBox> {
    Ok(BoundingBox::plane(b[0], b[1], b[2], b[3])?)
}

fn double_box(b: &[f64]) -> Result<BoundingBox> {
    Ok(BoundingBox::new(vec![b[0], b[2], b[0], b[2]], vec![b[1], b[3], b[1], b[3]])?)
}

pub fn run(cli: &Cli) -> Result<u8> {
    if cli.prec < 64 {
        return Err(usage("--prec must be at least 64"));
    }
    match &cli.command {
        Command::Modpoly { n } => cmd_modpoly(cli, *n),
        Command::JEval { re, im, derivative } => cmd_j_eval(cli, re, im, *derivative),
        Command::JInv { re, im } => cmd_j_inv(cli, re, im),
        Command::Geodesic { op } => cmd_geodesic(cli, op),
        Command::Zn { op } => match op {
            ZnOp::Build { n } => cmd_zn_build(cli, *n),
            ZnOp::Trace(args) => cmd_trace_zn(cli, args),
            ZnOp::Certify { n, x, y } => cmd_zn_certify(cli, *n, *x, *y),
        },
        Command::Restrict { curve } => cmd_restrict(cli, curve),
        Command::Trace { kind } => match kind {
            TraceKind::Zn(args) => cmd_trace_zn(cli, args),
            TraceKind::Intersect(args) => cmd_trace_intersect(cli, args),
        },
        Command::Detect(args) => cmd_detect(cli, args),
    }
}

fn cmd_modpoly(cli: &Cli, n: u32) -> Result<u8> {
    if n == 0 {
        return Err(usage("level must be positive"));
    }
    let phi = cache(cli, 0).modpoly(n)?;
    let text = match cli.format {
        Some(Format::Text) => format!("{:?}\n", phi.poly),
        Some(Format::Svg) => return Err(usage("modpoly has no SVG output")),
        _ => {
            let mut v = phi.poly.to_json_value();
            v["N"] = json!(n);
            v["psi"] = json!(phi.psi());
            pretty(&v)
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn upper_half_point(cli: &Cli, re: &str, im: &str) -> Result<UpperHalfPoint> {
    let z = PrecisionComplex::new(parse_float(re, cli.prec)?, parse_float(im, cli.prec)?);
    Ok(UpperHalfPoint::new(z)?)
}

fn cmd_j_eval(cli: &Cli, re: &str, im: &str, derivative: bool) -> Result<u8> {
    let z = upper_half_point(cli, re, im)?;
    let (j, dj, reduced) = j_eval_with_derivative(&z);
    let text = match cli.format {
        Some(Format::Json) => {
            let mut v = json!({ "prec": cli.prec, "z": complex_json(z.z()), "j": complex_json(&j), "reduced": complex_json(reduced.z()) });
            if derivative {
                v["derivative"] = complex_json(&dj);
            }
            pretty(&v)
        }
        Some(Format::Svg) => return Err(usage("j-eval has no SVG output")),
        _ => {
            let mut s = format!("j = {}\n", complex_text(&j));
            if derivative {
                s += &format!("j' = {}\n", complex_text(&dj));
            }
            s
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn cmd_j_inv(cli: &Cli, re: &str, im: &str) -> Result<u8> {
    let c = PrecisionComplex::new(parse_float(re, cli.prec)?, parse_float(im, cli.prec)?);
    let z = j_inverse(&c)?;
    let text = match cli.format {
        Some(Format::Json) => pretty(&json!({ "prec": cli.prec, "j": complex_json(&c), "z": complex_json(z.z()) })),
        Some(Format::Svg) => return Err(usage("j-inv has no SVG output")),
        _ => format!("z = {}\n", complex_text(z.z())),
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn geodesic_matrix(a: &str, b: &str, c: &str) -> Result<GeodesicMatrix> {
    Ok(GeodesicMatrix::from_entries(parse_rational(a)?, parse_rational(b)?, parse_rational(c)?)?)
}

fn locus_json(l: &GeodesicLocus) -> Value {
    match l {
        GeodesicLocus::Semicircle { center, radius_sq } => {
            json!({"kind": "semicircle", "center": center.to_string(), "radius_sq": radius_sq.to_string()})
        }
        GeodesicLocus::VerticalLine { x0 } => json!({"kind": "vertical", "x0": x0.to_string()}),
    }
}

fn geodesic_json(g: &GeodesicMatrix) -> Value {
    let e = g.matrix().entries();
    let l = g.locus();
    let (p, q) = l.endpoints();
    json!({
        "A": [[e[0].to_string(), e[1].to_string()], [e[2].to_string(), e[3].to_string()]],
        "det": g.det().to_string(),
        "endpoints": [p.to_string(), q.to_string()],
        "quadratic": p.is_quadratic(),
        "locus": locus_json(&l),
    })
}

fn endpoint_text(e: &Endpoint) -> String {
    match e {
        Endpoint::Infinity => e.to_string(),
        _ => format!("{e} ≈ {}", e.to_f64()),
    }
}

fn cmd_geodesic(cli: &Cli, op: &GeodesicOp) -> Result<u8> {
    let json_out = cli.format == Some(Format::Json);
    let text = match op {
        GeodesicOp::Endpoints(m) => {
            let g = geodesic_matrix(&m.a, &m.b, &m.c)?;
            let (p, q) = g.locus().endpoints();
            if json_out {
                pretty(&geodesic_json(&g))
            } else {
                format!("{}\n{}\n", endpoint_text(&p), endpoint_text(&q))
            }
        }
        GeodesicOp::Locus(m) => {
            let g = geodesic_matrix(&m.a, &m.b, &m.c)?;
            if json_out {
                pretty(&geodesic_json(&g))
            } else {
                match locus(&g) {
                    GeodesicLocus::Semicircle { center, radius_sq } => {
                        format!("semicircle |z - {center}|^2 = {radius_sq}\n")
                    }
                    GeodesicLocus::VerticalLine { x0 } => format!("vertical line Re z = {x0}\n"),
                }
            }
        }
        GeodesicOp::Conjugate { by, entries } => {
            let g = geodesic_matrix(&entries.a, &entries.b, &entries.c)?;
            let e: Vec<_> = by.iter().map(|s| parse_rational(s)).collect::<geoproj::Result<_>>()?;
            let b = RationalMatrix2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone());
            let conj = canonicalize(&conjugate_geodesic(&b, &g)?);
            if json_out {
                pretty(&geodesic_json(&conj))
            } else {
                let e = conj.matrix().entries();
                format!("{} {} {}\n", e[0], e[1], e[2])
            }
        }
        GeodesicOp::Plot { geodesics, view, svg } => {
            let gs = geodesics
                .iter()
                .map(|s| {
                    let parts: Vec<&str> = s.split(',').collect();
                    if parts.len() != 3 {
                        return Err(usage(format!("expected a,b,c but got {s:?}")));
                    }
                    geodesic_matrix(parts[0], parts[1], parts[2])
                })
                .collect::<Result<Vec<_>>>()?;
            let drawing = plot_geodesics(&gs, view.as_deref());
            if let Some(p) = svg {
                write_file(p, &drawing)?;
            }
            if svg.is_some() && cli.format != Some(Format::Svg) {
                pretty(&json!(gs.iter().map(geodesic_json).collect::<Vec<_>>()))
            } else {
                drawing
            }
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn plot_geodesics(gs: &[GeodesicMatrix], view: Option<&[f64]>) -> String {
    let (x0, x1, ymax) = match view {
        Some(v) => (v[0], v[1], v[2]),
        None => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut top: f64 = 1.0;
            for g in gs {
                match g.locus() {
                    GeodesicLocus::Semicircle { center, radius_sq } => {
                        let (c, r) = (center.to_f64(), radius_sq.to_f64().sqrt());
                        lo = lo.min(c - r);
                        hi = hi.max(c + r);
                        top = top.max(r);
                    }
                    GeodesicLocus::VerticalLine { x0 } => {
                        lo = lo.min(x0.to_f64() - 1.0);
                        hi = hi.max(x0.to_f64() + 1.0);
                    }
                }
            }
            let pad = 0.1 * (hi - lo);
            (lo - pad, hi + pad, 1.2 * top.max(0.5 * (hi - lo)))
        }
    };
    let mut panel = Panel::new(Viewport::new(x0, x1, 0.0, ymax, 640.0, 400.0), "special geodesics", "Re z", "Im z");
    for (k, g) in gs.iter().enumerate() {
        match g.locus() {
            GeodesicLocus::Semicircle { center, radius_sq } => {
                panel.semicircle(center.to_f64(), radius_sq.to_f64().sqrt(), color(k))
            }
            GeodesicLocus::VerticalLine { x0 } => panel.vertical_ray(x0.to_f64(), color(k)),
        }
    }
    document(&mut [panel])
}

fn cmd_zn_build(cli: &Cli, n: u32) -> Result<u8> {
    let z = build_zn(n, &cache(cli, n))?;
    let text = match cli.format {
        Some(Format::Text) => format!("{:?}\n", z.poly),
        Some(Format::Svg) => return Err(usage("zn build has no SVG output")),
        _ => {
            let mut v = z.poly.to_json_value();
            v["N"] = json!(n);
            pretty(&v)
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn branch_panel(branches: &[TracedBranch], bbox: &[f64], coords: (usize, usize), title: &str, labels: (&str, &str)) -> Panel {
    let mut p = Panel::new(Viewport::new(bbox[0], bbox[1], bbox[2], bbox[3], 560.0, 480.0), title, labels.0, labels.1);
    for (k, b) in branches.iter().enumerate() {
        p.polyline(b.points.iter().map(|q| (q[coords.0], q[coords.1])), color(k));
    }
    p
}

fn cmd_trace_zn(cli: &Cli, args: &ZnTraceArgs) -> Result<u8> {
    let cache = cache(cli, args.n);
    let z = build_zn(args.n, &cache)?;
    let mut opts = ZnTraceOptions::new(plane_box(&args.bbox)?, args.step, tol(cli, 1e-9)?)?;
    opts.grid = args.grid;
    opts.prec = cli.prec;
    let branches = trace_zn(&z, &opts)?;
    let drawing = || {
        let title = format!("Z_{} ({} branches)", args.n, branches.len());
        document(&mut [branch_panel(&branches, &args.bbox, (0, 1), &title, ("x", "y"))])
    };
    if let Some(p) = &args.svg {
        write_file(p, &drawing())?;
    }
    let text = match cli.format {
        Some(Format::Svg) => drawing(),
        Some(Format::Text) => branch_summary(&branches),
        _ => pretty(&branches_to_json(args.n, &branches)),
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn branch_summary(branches: &[TracedBranch]) -> String {
    let mut s = format!("{} branches\n", branches.len());
    for (k, b) in branches.iter().enumerate() {
        s += &format!("  {k}: {} points, max residual {:.3e}, ends {:?}\n", b.len(), b.max_residual(), b.ends);
    }
    s
}

fn cmd_zn_certify(cli: &Cli, n: u32, x: f64, y: f64) -> Result<u8> {
    let cache = cache(cli, n);
    let t = tol(cli, 1e-9)?;
    let (code, v) = match certify_special_geodesic_point(n, x, y, t, cli.prec, &cache) {
        Ok(cert) => (EXIT_OK, json!({ "certified": true, "certificate": cert.to_json() })),
        Err(Error::CertificationFailed { reason, .. }) => {
            (EXIT_NEGATIVE, json!({ "certified": false, "N": n, "point": [x, y], "reason": reason }))
        }
        Err(e) => return Err(e.into()),
    };
    let text = match cli.format {
        Some(Format::Text) => match &v["certificate"] {
            Value::Null => format!("not certified: {}\n", v["reason"]),
            c => format!("A = {}, residual {}, trace zero {}\n", c["A"], c["residual"], c["trace_zero"]),
        },
        _ => pretty(&v),
    };
    emit(cli, &text)?;
    Ok(code)
}

fn cmd_restrict(cli: &Cli, curve: &Path) -> Result<u8> {
    let c = load_curve(curve)?;
    let w = weil_restrict(&c);
    let text = match cli.format {
        Some(Format::Text) => format!("re: {:?}\nim: {:?}\n", w.re_part, w.im_part),
        _ => pretty(&w.to_json_value()),
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn cmd_trace_intersect(cli: &Cli, args: &IntersectArgs) -> Result<u8> {
    let c = load_curve(&args.curve)?;
    let cache = cache(cli, args.m);
    let mut opts = IntersectionOptions::new(double_box(&args.bbox)?, args.step, tol(cli, 1e-8)?)?;
    opts.prec = cli.prec;
    let branches = trace_intersection(&c, args.m, &opts, &cache)?;
    let drawing = || {
        document(&mut [
            branch_panel(&branches, &args.bbox, (0, 1), "first plane", ("x1", "y1")),
            branch_panel(&branches, &args.bbox, (2, 3), "second plane", ("x2", "y2")),
        ])
    };
    if let Some(p) = &args.svg {
        write_file(p, &drawing())?;
    }
    let text = match cli.format {
        Some(Format::Svg) => drawing(),
        Some(Format::Text) => branch_summary(&branches),
        _ => {
            let mut v = branches_to_json(args.m, &branches);
            let obj = v.as_object_mut().expect("object");
            let level = obj.remove("N").unwrap_or(Value::Null);
            obj.insert("M".into(), level);
            pretty(&v)
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn cmd_detect(cli: &Cli, args: &DetectArgs) -> Result<u8> {
    let c = load_curve(&args.curve)?;
    if args.m_list.is_empty() || args.m_list.contains(&0) {
        return Err(usage("--M needs positive levels"));
    }
    let budget = DetectorBudget {
        nmax_exact: args.nmax_exact,
        nmax_search: args.nmax_search,
        m_list: args.m_list.clone(),
        tol: tol(cli, 1e-8)?,
        k_required: args.k,
        bbox: double_box(&args.bbox)?,
        step: args.step,
        prec: cli.prec,
    };
    let needed = args.nmax_exact.max(args.nmax_search).max(args.m_list.iter().copied().max().unwrap_or(1));
    let cache = cache(cli, needed);
    let report = detect_strongly_special(&c, &budget, &cache).map_err(|e| match e {
        Error::HorizontalVertical => anyhow!(Usage("the curve is horizontal or vertical".into())),
        e => e.into(),
    })?;
    let text = match cli.format {
        Some(Format::Text) => match &report.verdict {
            Verdict::StronglySpecial(n) => format!("strongly special: N = {n}\n"),
            v => format!("{} ({} distinct certified level pairs)\n", v.tag(), report.distinct_level_pairs()),
        },
        Some(Format::Svg) => bail!(usage("detect has no SVG output")),
        _ => pretty(&report.to_json()),
    };
    emit(cli, &text)?;
    Ok(match report.verdict {
        Verdict::StronglySpecial(_) => EXIT_OK,
        Verdict::NotSpecial(_) => EXIT_NEGATIVE,
        Verdict::EvidenceSpecial(_) | Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}
