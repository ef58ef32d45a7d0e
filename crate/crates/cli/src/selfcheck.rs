//! Built-in verification suite: fast end-to-end checks of the numerical
//! foundations. Prints one line per check; exits nonzero when any fails.

use modtorus::arith::{self, Modulus};
use modtorus::expsum::{self, KloostermanEvaluator, KloostermanTable};
use modtorus::kernels;
use modtorus::torusgeo::{generate_s_q, BallSpec, TorusPoint};

use crate::EXIT_CHECK_FAILED;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, run: impl FnOnce() -> (bool, String)) -> Outcome {
    let started = std::time::Instant::now();
    let (passed, detail) = run();
    let status = if passed { "ok" } else { "FAILED" };
    println!(
        "{status:6} {name}: {detail} ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
    Outcome {
        name,
        passed,
        detail,
    }
}

pub fn run() -> i32 {
    let mut outcomes = Vec::new();

    outcomes.push(check("j1-envelope", || {
        let ok = kernels::j1_envelope_holds();
        (ok, "|J1(x)| <= min(x/2, 1/sqrt(x)) and x*J1^2 <= 0.7 on 2000-point grid".into())
    }));

    outcomes.push(check("parseval", || {
        let mut worst = 0.0f64;
        for radius in [0.05, 0.1, 0.2, 0.3] {
            match kernels::parseval_residual(radius, 1e-6) {
                Ok(r) => worst = worst.max(r),
                Err(e) => return (false, format!("error at R={radius}: {e}")),
            }
        }
        (worst < 2e-6, format!("max residual {worst:.3e} over R in {{0.05,0.1,0.2,0.3}}"))
    }));

    outcomes.push(check("kloosterman-oracle", || {
        let mut worst = 0.0f64;
        for q in 1..=200u64 {
            let modulus = Modulus::new(q).expect("positive");
            let table = match KloostermanTable::build(&modulus) {
                Ok(t) => t,
                Err(e) => return (false, format!("table q={q}: {e}")),
            };
            let eval = KloostermanEvaluator::new(&modulus);
            for m in 0..q {
                for n in 0..q {
                    let diff = (table.entry_mod(m, n) - eval.eval(m as i64, n as i64)).abs();
                    worst = worst.max(diff);
                }
            }
        }
        (worst < 1e-9, format!("max |table - direct| = {worst:.3e} over q <= 200"))
    }));

    outcomes.push(check("pair-count", || {
        for q in [2u64, 3, 5, 7, 97, 151, 211, 293] {
            let modulus = Modulus::new(q).expect("positive");
            let ug = arith::unit_group(&modulus);
            for c1 in 1..q {
                for c2 in 1..q {
                    if expsum::pair_count_with_units(&ug, c1, c2) > 2 {
                        return (false, format!("count > 2 at q={q}, ({c1},{c2})"));
                    }
                }
            }
        }
        (true, "S(c1,c2) <= 2 on sampled primes <= 300".into())
    }));

    outcomes.push(check("corner-emptiness", || {
        let mut q = 53u64;
        while q <= 997 {
            let modulus = Modulus::new(q).expect("positive");
            let ps = generate_s_q(&modulus);
            let r = 1.0 / (2.0 * (q as f64).sqrt());
            let ball = BallSpec::new(TorusPoint::new(r, r), r).expect("valid radius");
            if ps.ball_count(&ball) != 0 {
                return (false, format!("corner ball not empty at q={q}"));
            }
            q = arith::next_prime(q + 1);
        }
        (true, "mu_q of the corner ball is exactly 0 for primes in [53, 997]".into())
    }));

    let failures: Vec<&Outcome> = outcomes.iter().filter(|o| !o.passed).collect();
    if failures.is_empty() {
        println!("selfcheck: all {} checks passed", outcomes.len());
        0
    } else {
        for f in &failures {
            eprintln!("selfcheck failure: {} ({})", f.name, f.detail);
        }
        EXIT_CHECK_FAILED
    }
}
