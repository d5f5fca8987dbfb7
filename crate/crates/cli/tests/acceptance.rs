//! Prints one PASS/FAIL line per acceptance criterion. Criteria with a
//! documented known failure do not fail the run.

use kmsgraph_cli::presets::{criteria, run_criterion, Settings};

fn main() {
    let settings = Settings::default();
    let mut unexpected = 0;
    for c in criteria() {
        let outcome = run_criterion(&c, &settings);
        println!("{}", outcome.line());
        if !outcome.ok() {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
