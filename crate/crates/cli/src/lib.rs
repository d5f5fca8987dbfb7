//! Command-line front end for `kmsgraph`.
//!
//! [`run`] parses arguments, dispatches one verb and prints its report.
//! Exit status: 0 on success, 2 on a precondition or input failure, 3 when
//! `--strict` is set and a verdict is undetermined, 1 otherwise.

pub mod args;
pub mod commands;
pub mod context;
pub mod output;
pub mod presets;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use kmsgraph::Error;
use serde_json::{json, Value};

use args::Cli;
use context::Context;

/// Each verb with the library operations it exposes.
pub const VERB_TABLE: &[(&str, &[&str])] = &[
    ("parse", &["parse_graph", "truncate", "weight_matrix"]),
    ("green", &["green_function"]),
    ("entropy", &["gurevich_entropy"]),
    ("first-return", &["first_return_series"]),
    ("classify", &["classify_recurrence"]),
    ("beta-set", &["classify_beta_set"]),
    ("harmonic-verify", &["verify_harmonic"]),
    ("delta-solve", &["bratteli_decompose", "solve_level_chain"]),
    ("martin", &["martin_kernel"]),
    ("ray-weight", &["ray_weight"]),
    ("summability", &["summability"]),
    ("extremal-ray", &["extremal_measure_along_ray"]),
    ("boundary-test", &["boundary_limit_test"]),
    ("ends", &["end_fingerprint", "shift", "reaches_avoiding"]),
    ("bratteli-ends", &["bratteli_ends"]),
    ("minimal-end", &["minimal_end_test"]),
    ("almost-undirected", &["almost_undirected_test"]),
    ("to-bratteli", &["graph_to_bratteli"]),
    ("source-turn", &["turn_into_source", "simple_path_sum"]),
    ("transfer", &["transfer_harmonic_source"]),
    ("plan-returns", &["plan_return_paths"]),
    ("apply-returns", &["apply_return_paths"]),
    ("attach", &["attach_finite"]),
    ("glue", &["build_glue", "extend_from_hereditary"]),
    ("kms", &["measure_of_cylinder", "kms_state_value", "path_concat", "doob_transform"]),
    ("example", &[]),
    ("selftest", &[]),
];

/// Every library operation reachable from the command line.
pub const OPERATIONS: &[&str] = &[
    "parse_graph",
    "truncate",
    "weight_matrix",
    "path_concat",
    "shift",
    "green_function",
    "first_return_series",
    "simple_path_sum",
    "gurevich_entropy",
    "classify_recurrence",
    "classify_beta_set",
    "verify_harmonic",
    "measure_of_cylinder",
    "kms_state_value",
    "doob_transform",
    "bratteli_decompose",
    "solve_level_chain",
    "martin_kernel",
    "ray_weight",
    "summability",
    "extremal_measure_along_ray",
    "boundary_limit_test",
    "end_fingerprint",
    "bratteli_ends",
    "minimal_end_test",
    "almost_undirected_test",
    "reaches_avoiding",
    "graph_to_bratteli",
    "turn_into_source",
    "transfer_harmonic_source",
    "plan_return_paths",
    "apply_return_paths",
    "attach_finite",
    "build_glue",
    "extend_from_hereditary",
];

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_UNDETERMINED: i32 = 3;

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistency(_) | Error::ResourceCap(_) => EXIT_FAILURE,
        Error::Undetermined(_) => EXIT_OK,
        _ => EXIT_PRECONDITION,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Schema { .. } => "schema",
        Error::DanglingEndpoint(_) => "dangling_endpoint",
        Error::ZeroMultiplicity { .. } => "zero_multiplicity",
        Error::Sink(_) => "sink",
        Error::VertexNotFound(_) => "vertex_not_found",
        Error::NonComposable(_) => "non_composable",
        Error::Precondition(_) => "precondition",
        Error::Undetermined(_) => "undetermined",
        Error::Inconsistency(_) => "inconsistency",
        Error::Infeasible(_) => "infeasible",
        Error::ResourceCap(_) => "resource_cap",
    }
}

/// Runs the command line `argv` (program name first) against stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the command line `argv`, writing the report to `out` and diagnostics to `err`.
pub fn run_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let format = cli.global.format;
    let strict = cli.global.strict;
    let is_preset = matches!(cli.verb, args::Verb::Example { .. } | args::Verb::Selftest { .. });
    let ctx = Context::new(cli.global);
    match commands::dispatch(&ctx, &cli.verb) {
        Ok(report) => {
            let _ = out.write_all(output::render(&report, format).as_bytes());
            if is_preset {
                if report.get("ok").and_then(Value::as_bool) == Some(false) {
                    return EXIT_FAILURE;
                }
                return EXIT_OK;
            }
            if strict && output::has_undetermined(&report) {
                EXIT_UNDETERMINED
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let code = error_code(&e);
            let record = json!({"error": error_kind(&e), "message": e.to_string()});
            if matches!(e, Error::Undetermined(_)) {
                let _ = out.write_all(output::render(&json!({"status": "undetermined", "error": record}), format).as_bytes());
                return if strict { EXIT_UNDETERMINED } else { EXIT_OK };
            }
            let _ = writeln!(err, "kmsgraph: {e}");
            let _ = err.write_all(output::render(&record, output::Format::Json).as_bytes());
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn every_operation_is_exposed_once() {
        for op in OPERATIONS {
            let n = VERB_TABLE.iter().filter(|(_, ops)| ops.contains(op)).count();
            assert_eq!(n, 1, "{op}");
        }
        for (_, ops) in VERB_TABLE {
            for op in *ops {
                assert!(OPERATIONS.contains(op), "{op}");
            }
        }
    }

    #[test]
    fn verb_table_matches_subcommands() {
        let cmd = Cli::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
        assert_eq!(names.len(), VERB_TABLE.len());
        for (verb, _) in VERB_TABLE {
            assert!(names.contains(verb), "{verb}");
        }
    }
}
