use anyhow::Context;
use fars_core::io::{read_model, write_atomic};
use fars_core::model::validate_model;
use fars_core::reconstruct_sigma;
use fars_core::reliability::reliability_report;

use crate::{ReliabilityArgs, EXIT_INPUT, EXIT_OK};

pub(crate) fn run(args: &ReliabilityArgs) -> u8 {
    let model = match read_model(&args.model) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {}: {e}", args.model.display());
            return EXIT_INPUT;
        }
    };
    let violations = validate_model(&model);
    if !violations.is_empty() {
        eprintln!("error: {} is not a valid factor model:", args.model.display());
        for v in &violations {
            eprintln!("  - {v}");
        }
        return EXIT_INPUT;
    }
    let report = match reconstruct_sigma(&model).and_then(|s| reliability_report(&model, &s)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    print!("{}", report.to_table());
    let written = (|| -> anyhow::Result<()> {
        let csv = args.out.join("reliability.csv");
        write_atomic(&csv, report.to_csv().as_bytes()).with_context(|| csv.display().to_string())?;
        let json = args.out.join("reliability.json");
        write_atomic(&json, report.to_json().as_bytes()).with_context(|| json.display().to_string())?;
        Ok(())
    })();
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}
