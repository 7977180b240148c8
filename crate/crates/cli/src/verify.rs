use fars_core::fixtures;
use fars_core::io::read_model;
use fars_core::model::validate_model;
use fars_core::reconstruct_sigma;
use fars_core::reliability::{random_model, theorem_report, FuzzConfig, TheoremFlags};
use fars_core::FactorModel;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{VerifyArgs, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_OK};

const DEFAULT_FUZZ: usize = 1000;

pub(crate) fn builtin_fixtures() -> Vec<(&'static str, FactorModel)> {
    vec![
        ("orthogonal simple structure (q=3, 5 items, l=.70)", fixtures::simple_structure(3, 5, 0.7)),
        ("one factor (p=5, l=.80)", fixtures::one_factor(5, 0.8)),
        (
            "correlated with cross-loadings (q=6, 5 items, l=.60, sl=.10, r=.30)",
            fixtures::cross_loaded(6, 5, 0.6, 0.1, 0.3),
        ),
        ("worked example (p=9, q=3)", fixtures::worked_example()),
    ]
}

fn flags_for(model: &FactorModel) -> Result<TheoremFlags, String> {
    reconstruct_sigma(model).map(|sigma| theorem_report(model, &sigma)).map_err(|e| e.to_string())
}

fn check(name: &str, model: &FactorModel) -> bool {
    match flags_for(model) {
        Ok(f) => {
            print_flags(name, &f);
            f.all_passed()
        }
        Err(e) => {
            println!("== {name}\n  error: {e}");
            false
        }
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn print_flags(name: &str, f: &TheoremFlags) {
    println!("== {name}");
    println!("  {:<22} {:>5} {:>12} {:>9}", "premise", "holds", "measured", "tol");
    for (label, p) in [("orthogonal", &f.orthogonal), ("diagonal L'S^-1L", &f.diagonal_lsl)] {
        println!("  {:<22} {:>5} {:>12.3e} {:>9.0e}", label, yes_no(p.holds), p.measured, p.tolerance);
    }
    println!("  {:<22} {:>5} {:>12} {:>9} {:>6}", "conclusion", "appl.", "measured", "tol", "result");
    for (label, c) in f.conclusions() {
        let result = if !c.applicable {
            "n/a"
        } else if c.holds {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "  {:<22} {:>5} {:>12.3e} {:>9.0e} {:>6}",
            label,
            yes_no(c.applicable),
            c.measured,
            c.tolerance,
            result
        );
    }
    if let Some(e) = &f.error {
        println!("  error: {e}");
    }
}

/// Runs `n` random models and prints one line per conclusion with its
/// applicable count and violation count. Returns whether all passed.
pub(crate) fn fuzz(n: usize, seed: u64) -> bool {
    let cfg = FuzzConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut applicable = [0usize; 7];
    let mut violations = [0usize; 7];
    let mut names = [""; 7];
    let mut errors = 0;
    for _ in 0..n {
        let f = match flags_for(&random_model(&mut rng, &cfg)) {
            Ok(f) if f.error.is_none() => f,
            _ => {
                errors += 1;
                continue;
            }
        };
        for (k, (name, c)) in f.conclusions().iter().enumerate() {
            names[k] = name;
            applicable[k] += c.applicable as usize;
            violations[k] += !c.passed() as usize;
        }
    }
    println!("== fuzz: {n} random models, seed {seed}");
    for (k, name) in names.iter().enumerate() {
        println!("  {:<22} applicable {:>5}  violations {:>5}", name, applicable[k], violations[k]);
    }
    if errors > 0 {
        println!("  models that could not be evaluated: {errors}");
    }
    errors == 0 && violations.iter().all(|&v| v == 0)
}

pub(crate) fn run(args: &VerifyArgs) -> u8 {
    let mut ok = true;
    let fuzz_count = match &args.model {
        Some(path) => {
            let model = match read_model(path) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {}: {e}", path.display());
                    return EXIT_INPUT;
                }
            };
            let violations = validate_model(&model);
            if !violations.is_empty() {
                eprintln!("error: {} is not a valid factor model:", path.display());
                for v in &violations {
                    eprintln!("  - {v}");
                }
                return EXIT_INPUT;
            }
            ok &= check(&path.display().to_string(), &model);
            args.fuzz.unwrap_or(0)
        }
        None => {
            for (name, model) in builtin_fixtures() {
                ok &= check(name, &model);
            }
            args.fuzz.unwrap_or(DEFAULT_FUZZ)
        }
    };
    if fuzz_count > 0 {
        ok &= fuzz(fuzz_count, args.seed);
    }
    println!("{}", if ok { "all applicable conclusions hold" } else { "some conclusions FAILED" });
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
