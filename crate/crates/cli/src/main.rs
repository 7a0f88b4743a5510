//! `boxcomp` — datasheets, table checks, evaluation, pp-form export,
//! quasi-interpolants, order studies and images for symmetric box splines.
//!
//! Exit codes: 0 ok, 1 usage error, 2 verification mismatch, 3 numerical
//! failure.

use boxcomp::eval::{eval_oracle, eval_recursive, to_ppform};
use boxcomp::reconstruct::{
    derive_quasi_interpolant, order_study, qi_reference_report, Signal, SplineField,
};
use boxcomp::render::{raycast, slice_image, SlicePlane};
use boxcomp::{DirectionMatrix, Error};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "boxcomp",
    version,
    about = "Symmetric box splines on the classical sampling lattices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the analytic datasheet of a spline, e.g. `info bcc:110`
    Info {
        /// Spline spec `<lattice>:<counts>`, e.g. cc2:11, cc3:101, Dn*:4:10
        spec: String,
        /// Emit one CSV row instead of aligned text
        #[arg(long)]
        csv: bool,
    },
    /// Regenerate all golden tables and diff against the embedded values
    Tables,
    /// Evaluate a spline at a point
    Eval {
        spec: String,
        /// Evaluation point, comma separated, e.g. --at 0.3,0.2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Vec<f64>,
        /// recursive | oracle | pp
        #[arg(long, default_value = "recursive")]
        method: String,
    },
    /// Convert to piecewise-polynomial form (versioned text format)
    Ppform {
        spec: String,
        /// Output file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Quasi-interpolant weights, or the reference-table cross-check
    Qi {
        spec: Option<String>,
        /// Print the cross-check report against the reference table
        #[arg(long)]
        crosscheck: bool,
    },
    /// Approximation-order study: errors and fitted slope over a list of h
    Order {
        /// gaussian | quadratic | ml
        #[arg(long, default_value = "gaussian")]
        signal: String,
        #[arg(long)]
        spline: String,
        /// Scales, comma separated, e.g. --h 0.25,0.125,0.0625
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        /// Write the rows as CSV to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grayscale PGM image of a spline slice
    Slice {
        spec: String,
        /// Slice plane for 3D splines, e.g. --plane z=0
        #[arg(long)]
        plane: Option<String>,
        #[arg(long, default_value_t = 256)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ray-cast a level set of a reconstructed signal to a PGM image
    Raycast {
        /// ml | gaussian
        #[arg(long, default_value = "ml")]
        signal: String,
        #[arg(long)]
        spline: String,
        /// Sample spacing of the reconstruction lattice
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 0.5)]
        iso: f64,
        #[arg(long, default_value_t = 128)]
        res: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own help/usage; map every parse problem to 1
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Numerical(_) | Error::Degenerate(_) => 3,
                Error::Io(_) => 3,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Cmd) -> boxcomp::Result<ExitCode> {
    match cmd {
        Cmd::Info { spec, csv } => {
            let xi = DirectionMatrix::parse_spec(&spec)?;
            print!("{}", datasheet(&xi, csv)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Tables => {
            let report = boxcomp::tables::verify_all()?;
            for line in &report.lines {
                println!("{line}");
            }
            if report.passed() {
                println!("5 tables, 0 mismatches");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{} mismatches:", report.mismatches.len());
                for m in &report.mismatches {
                    println!(
                        "  {} {}: expected {}, got {}",
                        m.table, m.location, m.expected, m.got
                    );
                }
                Ok(ExitCode::from(2))
            }
        }
        Cmd::Eval { spec, at, method } => {
            let xi = DirectionMatrix::parse_spec(&spec)?;
            if at.len() != xi.lattice().ambient_dim() {
                return Err(Error::Parse(format!(
                    "--at needs {} coordinates for {spec}",
                    xi.lattice().ambient_dim()
                )));
            }
            let v = match method.as_str() {
                "recursive" => eval_recursive(&xi, &at),
                "oracle" => eval_oracle(&xi, &at)?,
                "pp" => to_ppform(&xi)?.eval(&at),
                other => {
                    return Err(Error::Parse(format!(
                        "unknown method `{other}` (recursive | oracle | pp)"
                    )))
                }
            };
            println!("{v:.15e}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Ppform { spec, out } => {
            let xi = DirectionMatrix::parse_spec(&spec)?;
            let pp = to_ppform(&xi)?;
            if !pp.is_rationalized() {
                eprintln!(
                    "warning: no integer scaling up to 1e6 found; pp-form stored with floating coefficients"
                );
            }
            let text = pp.serialize();
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Qi { spec, crosscheck } => {
            if crosscheck {
                print!("{}", qi_reference_report()?);
                return Ok(ExitCode::SUCCESS);
            }
            let spec = spec.ok_or_else(|| {
                Error::Parse("qi needs a spline spec or --crosscheck".into())
            })?;
            let xi = DirectionMatrix::parse_spec(&spec)?;
            let qi = derive_quasi_interpolant(&xi)?;
            println!("{}: {}", xi.name(), qi);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Order {
            signal,
            spline,
            h,
            out,
        } => {
            let xi = DirectionMatrix::parse_spec(&spline)?;
            let sig = Signal::parse(&signal)?;
            if h.is_empty() {
                return Err(Error::Parse("--h needs at least two scales".into()));
            }
            let d = xi.dim();
            if matches!(sig, Signal::MarschnerLobb) && d != 3 {
                return Err(Error::Parse("the ml signal needs a 3D spline".into()));
            }
            let (lo, hi) = (vec![-0.5; d], vec![0.5; d]);
            let probe_n = 33;
            let f = move |x: &[f64]| sig.eval(x);
            let study = order_study(&xi, &f, &h, &lo, &hi, probe_n)?;
            println!("{:<10}{:<14}{}", "h", "linf", "l2");
            for r in &study.rows {
                println!("{:<10}{:<14.6e}{:.6e}", r.h, r.linf, r.l2);
            }
            println!(
                "slope: linf {:.3}, l2 {:.3}",
                study.slope_linf, study.slope_l2
            );
            if study.at_floor {
                println!("note: errors at the accuracy floor (signal reproduced exactly)");
            }
            if let Some(path) = out {
                std::fs::write(path, study.to_csv())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Slice {
            spec,
            plane,
            res,
            out,
        } => {
            let xi = DirectionMatrix::parse_spec(&spec)?;
            let plane = match (xi.dim(), plane) {
                (2, None) => SlicePlane::Full2D,
                (_, Some(p)) => SlicePlane::parse(&p)?,
                (3, None) => SlicePlane::Axis { axis: 2, value: 0.0 },
                _ => return Err(Error::Parse("slice supports 2D and 3D splines".into())),
            };
            let img = slice_image(&xi, plane, res)?;
            if img.is_blank() {
                eprintln!("warning: slice plane lies outside the support; image is blank");
            }
            std::fs::write(out, img.to_pgm())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Raycast {
            signal,
            spline,
            h,
            iso,
            res,
            out,
        } => {
            let xi = DirectionMatrix::parse_spec(&spline)?;
            if xi.dim() != 3 {
                return Err(Error::Parse("raycast needs a 3D spline".into()));
            }
            let sig = Signal::parse(&signal)?;
            if matches!(sig, Signal::Quadratic) {
                return Err(Error::Parse("raycast signals: ml | gaussian".into()));
            }
            let qi = derive_quasi_interpolant(&xi)?;
            let lo = [-1.0, -1.0, -1.0];
            let hi = [1.0, 1.0, 1.0];
            let f = move |x: &[f64]| sig.eval(x);
            let mut field = SplineField::from_signal(&xi, &qi, h, (&lo, &hi), &f)?;
            field.enable_fast_eval()?;
            let img = raycast(&field, iso, res)?;
            if img.is_blank() {
                eprintln!("note: no ray intersected the level set; image is background");
            }
            std::fs::write(out, img.to_pgm())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn datasheet(xi: &DirectionMatrix, csv: bool) -> boxcomp::Result<String> {
    let d = xi.descriptor();
    let qi = if (3..=4).contains(&d.r) {
        derive_quasi_interpolant(xi).ok()
    } else {
        None
    };
    let mut s = String::new();
    if csv {
        s.push_str(
            "name,lattice,m,degree,continuity,r,stencil,support_volume,unimodular,symmetric,q0,q1\n",
        );
        let (q0, q1) = match &qi {
            Some(q) => (q.q0.to_string(), q.q1.to_string()),
            None => (String::from("-"), String::from("-")),
        };
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            d.name,
            d.lattice_spec,
            d.m,
            d.degree,
            d.continuity,
            d.r,
            d.stencil_size,
            d.support_volume,
            d.unimodular,
            d.symmetric.map_or("-".into(), |b| b.to_string()),
            q0,
            q1
        ));
    } else {
        s.push_str(&format!("{:<12}{}\n", "spline", d.name));
        s.push_str(&format!(
            "{:<12}{} (d = {}, |det G| = {})\n",
            "lattice",
            d.lattice_spec,
            d.d,
            xi.lattice().det_g()
        ));
        let counts: Vec<String> = xi.counts().iter().map(|c| c.to_string()).collect();
        s.push_str(&format!(
            "{:<12}m = {} columns over shells [{}]\n",
            "directions",
            d.m,
            counts.join(", ")
        ));
        s.push_str(&format!("{:<12}{}\n", "degree", d.degree));
        s.push_str(&format!(
            "{:<12}C^{} (r = {})\n",
            "continuity", d.continuity, d.r
        ));
        s.push_str(&format!("{:<12}{} lattice shifts\n", "stencil", d.stencil_size));
        s.push_str(&format!(
            "{:<12}volume {} ({} x |det G|)\n",
            "support", d.support_volume, d.stencil_size
        ));
        s.push_str(&format!(
            "{:<12}{}\n",
            "unimodular",
            if d.unimodular { "yes" } else { "no" }
        ));
        s.push_str(&format!(
            "{:<12}{}\n",
            "symmetric",
            match d.symmetric {
                Some(true) => "yes",
                Some(false) => "no",
                None => "n/a (no symmetry group for this lattice family)",
            }
        ));
        if let Some(q) = &qi {
            s.push_str(&format!(
                "{:<12}q0 = {}, q1 = {} (approximation order {})\n",
                "qi", q.q0, q.q1, q.order
            ));
        }
    }
    Ok(s)
}
