//! `mockdissect`: exact q-series computations for the M2-rank of
//! partitions without repeated odd parts, and valence-formula
//! certification of dissection identities.
//!
//! Exit codes for `certify`: 0 on PASS, 2 on FAIL, 1 on error.

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mockdissect_core::certify::{
    check_rank_differences, search_g1, valence_certificate, G1Ref, Verdict,
};
use mockdissect_core::cusporders::ord_bound_term;
use mockdissect_core::cyclotomic::CycNum;
use mockdissect_core::mockforms::{
    self, load_identity, mu_special_s, r2_eulerian, r2_lambert, s_series,
};
use mockdissect_core::modgroup::{cusp_set, Cusp, CuspClasses, GroupSpec};
use mockdissect_core::partitions;
use mockdissect_core::qseries::{frac, frac_from_str, QSeries};
use mockdissect_core::Rational;

#[derive(Parser)]
#[command(name = "mockdissect", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum R2Form {
    Eulerian,
    Lambert,
    Appell,
    Bruteforce,
}

#[derive(Subcommand)]
enum Command {
    /// Certify a dissection identity by the valence-formula argument.
    Certify {
        /// Identity file (JSON)
        #[arg(long, default_value = "identities/c7.json")]
        identity: String,
        /// Congruence group as "N,M" for Gamma_0(N) ∩ Gamma_1(M)
        #[arg(long, default_value = "196,28")]
        group: String,
        /// Divisor term as "residue:index" (default: first product term of residue 0)
        #[arg(long)]
        g1: Option<String>,
        /// Search all product terms for the divisor with the best bound
        #[arg(long)]
        best_g1: bool,
        /// Cap on the series precision the certificate may request
        #[arg(long, default_value_t = 4000)]
        prec_cap: i64,
        /// Worker threads for term assembly
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Write the certificate JSON here
        #[arg(long)]
        out: Option<String>,
    },
    /// Print the rank generating function R2(zeta_c^a; q) as a series.
    R2 {
        #[arg(long, default_value_t = 1)]
        a: i64,
        #[arg(long, default_value_t = 7)]
        c: u32,
        #[arg(long)]
        prec: i64,
        #[arg(long, value_enum, default_value_t = R2Form::Eulerian)]
        form: R2Form,
    },
    /// Print the generalized Lambert series S(k, c; tau_scale * tau).
    S {
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = 7)]
        c: u32,
        #[arg(long)]
        prec: i64,
        /// Scale on tau, e.g. "1/7"
        #[arg(long, default_value = "1")]
        tau_scale: String,
        /// Evaluate through the mu/theta-product route instead
        #[arg(long)]
        mu_route: bool,
    },
    /// Enumerate rank counts N2(m, n) by brute force (TSV).
    Bruteforce {
        #[arg(long)]
        n: u64,
        /// Report counts by rank residue modulo c
        #[arg(long)]
        c: Option<u32>,
        /// Also print the coefficient sum N2(k,c,n) zeta_c^{ak}
        #[arg(long)]
        a: Option<i64>,
    },
    /// List the inequivalent cusps of Gamma_0(N) ∩ Gamma_1(M) with widths.
    Cusps {
        #[arg(long)]
        gamma0: u32,
        #[arg(long)]
        gamma1: u32,
        #[arg(long, conflicts_with = "tsv")]
        json: bool,
        #[arg(long)]
        tsv: bool,
    },
    /// Per-cusp order lower bounds for the summands of an identity (TSV).
    Orders {
        #[arg(long, default_value = "identities/c7.json")]
        identity: String,
        #[arg(long, default_value = "196,28")]
        group: String,
        /// Restrict to a single cusp "a/c" (or "inf")
        #[arg(long)]
        cusp: Option<String>,
    },
    /// Rank-difference series R2_{r,0,7}(d; q) read off an identity.
    Rankdiff {
        #[arg(long, default_value = "identities/c7.json")]
        identity: String,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long, default_value_t = 21)]
        prec: i64,
        /// Compare all 21 series against the oracles and report
        #[arg(long)]
        check: bool,
    },
    /// Extract the terms of a series with exponents = r (mod c).
    Dissect {
        #[arg(long)]
        c: u32,
        #[arg(long)]
        r: u32,
        /// Series file in the line format (default: stdin)
        #[arg(long)]
        file: Option<String>,
    },
}

fn parse_group(s: &str) -> Result<GroupSpec, String> {
    let (n, m) = s.split_once(',').ok_or_else(|| format!("group must be N,M: {s:?}"))?;
    let n: u32 = n.trim().parse().map_err(|_| format!("bad N in {s:?}"))?;
    let m: u32 = m.trim().parse().map_err(|_| format!("bad M in {s:?}"))?;
    Ok(GroupSpec::new(n, m))
}

fn run() -> Result<ExitCode, Box<dyn std::error::Error>> {
    let cli = Cli::parse();
    match cli.command {
        Command::Certify { identity, group, g1, best_g1, prec_cap, workers, out } => {
            let id = load_identity(&identity)?;
            let g = parse_group(&group)?;
            let g1 = if best_g1 {
                let (best, log) = search_g1(&id, &g)?;
                eprintln!("g1 search over {} candidates:", log.len());
                let mut sorted: Vec<_> = log.iter().collect();
                sorted.sort_by(|x, y| y.1.cmp(&x.1));
                for (r, b) in sorted.iter().take(5) {
                    eprintln!("  {}:{} -> B = {}", r.residue, r.index, b);
                }
                Some(best)
            } else {
                g1.map(|s| G1Ref::parse(&s)).transpose()?
            };
            let cert = valence_certificate(&id, &g, g1, prec_cap, workers)?;
            println!("{}", cert.to_json());
            if let Some(path) = out {
                cert.write_to(&path)?;
                eprintln!("certificate written to {path}");
            }
            return Ok(match cert.verdict {
                Verdict::Pass => ExitCode::SUCCESS,
                Verdict::Fail { .. } => ExitCode::from(2),
            });
        }
        Command::R2 { a, c, prec, form } => {
            let series = match form {
                R2Form::Eulerian => r2_eulerian(a, c, prec),
                R2Form::Lambert => r2_lambert(a, c, prec)?,
                R2Form::Appell => {
                    let pref = mockforms::distinct_odd_prefactor(prec).to_cyc(c);
                    let front = CycNum::zeta_pow(c, -a).sub(&CycNum::one())?;
                    pref.mul(&mockforms::appell_a2_special(a, c, prec)?).scale(&front)
                }
                R2Form::Bruteforce => partitions::r2_series_bruteforce(a, c, prec as u64)?,
            };
            // uniform coefficient order in the printed form
            let series = series.map_coeffs(|z| z.embed(c).expect("order divides c"));
            print!("{}", series.to_text());
        }
        Command::S { k, c, prec, tau_scale, mu_route } => {
            let scale = frac_from_str(&tau_scale)?;
            let series = if mu_route {
                if scale != frac(1, 1) {
                    return Err("the mu route prints S(k,c;tau); rescale externally".into());
                }
                mu_special_s(k, c, prec)?
            } else {
                s_series(k, c, frac(prec, 1), scale)?
            };
            print!("{}", series.to_text());
        }
        Command::Bruteforce { n, c, a } => {
            match c {
                None => {
                    println!("m\tN2(m,{n})");
                    let bound = (n as i64 + 1) / 2 + 1;
                    for m in -bound..=bound {
                        let count = partitions::n2_count(m, n)?;
                        if count > 0 {
                            println!("{m}\t{count}");
                        }
                    }
                }
                Some(c) => {
                    println!("k\tN2(k,{c},{n})");
                    let row = partitions::n2_mod_row(c, n)?;
                    for (k, count) in row.iter().enumerate() {
                        println!("{k}\t{count}");
                    }
                    if let Some(a) = a {
                        let mut coef = CycNum::zero().embed(c)?;
                        for (k, &count) in row.iter().enumerate() {
                            coef = coef.add(
                                &CycNum::zeta_pow(c, a * k as i64)
                                    .scale(&Rational::from_integer((count as i64).into())),
                            )?;
                        }
                        println!("# sum N2(k,{c},{n}) zeta_{c}^{{{a}k}} = {coef}");
                    }
                }
            }
        }
        Command::Cusps { gamma0, gamma1, json, tsv } => {
            let set = cusp_set(&GroupSpec::new(gamma0, gamma1))?;
            if json || !tsv {
                let items: Vec<serde_json::Value> = set
                    .iter()
                    .map(|(c, w)| {
                        serde_json::json!({
                            "num": if c.is_infinity() { 1 } else { c.num() },
                            "den": if c.is_infinity() { 0 } else { c.den() },
                            "width": w,
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&serde_json::json!({"cusps": items}))?);
            } else {
                println!("cusp\twidth");
                for (c, w) in set {
                    println!("{c}\t{w}");
                }
            }
        }
        Command::Orders { identity, group, cusp } => {
            let id = load_identity(&identity)?;
            let g = parse_group(&group)?;
            let targets: Vec<(Cusp, u64)> = match cusp {
                Some(s) => {
                    let c = Cusp::parse(&s)?;
                    let w = mockdissect_core::modgroup::width(&c, &g);
                    vec![(c, w)]
                }
                None => CuspClasses::for_group(&g)?.reps().to_vec(),
            };
            let summands = mockdissect_core::certify::summand_decompositions(&id);
            println!("cusp\twidth\tbound\texact");
            for (c, w) in targets {
                let mut best: Option<mockdissect_core::cusporders::OrderBound> = None;
                for s in &summands {
                    let b = ord_bound_term(s, &c)?;
                    best = Some(match best {
                        None => b,
                        Some(prev) => prev.min(b),
                    });
                }
                let b = best.expect("identity has summands");
                println!("{c}\t{w}\t{}\t{}", b.value, if b.exact { "yes" } else { "no" });
            }
        }
        Command::Rankdiff { identity, r, d, prec, check } => {
            let id = load_identity(&identity)?;
            if check {
                let outcomes = check_rank_differences(&id, prec)?;
                println!("r\td\tchecked_below\tinteger\tresult");
                let mut all_ok = true;
                for o in &outcomes {
                    let result = match &o.first_mismatch {
                        None => "agree".to_string(),
                        Some((e, got, want)) => {
                            all_ok = false;
                            format!("MISMATCH at q^{e}: {got} vs {want}")
                        }
                    };
                    println!(
                        "{}\t{}\t{}\t{}\t{}",
                        o.r, o.d, o.checked_below, o.integer_coefficients, result
                    );
                }
                if !all_ok {
                    return Ok(ExitCode::from(2));
                }
            } else {
                let (r, d) = match (r, d) {
                    (Some(r), Some(d)) => (r, d),
                    _ => return Err("rankdiff needs --r and --d (or --check)".into()),
                };
                let s = mockforms::rank_diff_from_identity(&id, r, d, frac(prec, 1))?;
                print!("{}", s.to_text());
            }
        }
        Command::Dissect { c, r, file } => {
            let text = match file {
                Some(path) => std::fs::read_to_string(path)?,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf)?;
                    buf
                }
            };
            // coefficients may be rational or cyclotomic; try both forms
            match QSeries::<Rational>::from_text(&text) {
                Ok(series) => print!("{}", series.dissect(c, r)?.to_text()),
                Err(_) => {
                    let series = QSeries::<CycNum>::from_text(&text)?;
                    print!("{}", series.dissect(c, r)?.to_text());
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
