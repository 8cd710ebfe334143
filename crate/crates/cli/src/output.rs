//! Output plumbing: stdout by default, `<out>.<ext>` plus
//! `<out>.manifest.json` when an output prefix is given.

use crate::manifest::Manifest;
use squarefall::process::TrialResult;
use std::io::Write;

fn write_manifest(prefix: &str, mut mani: Manifest, outputs: Vec<String>) -> std::io::Result<()> {
    mani.outputs = outputs;
    let path = format!("{prefix}.manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&mani).unwrap() + "\n")
}

pub fn emit_json(
    out: Option<&str>,
    value: &serde_json::Value,
    mani: &Manifest,
) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).unwrap() + "\n";
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(prefix) => {
            let path = format!("{prefix}.json");
            std::fs::write(&path, &text)?;
            write_manifest(
                prefix,
                Manifest {
                    outputs: vec![],
                    ..Manifest::new(&mani.command, mani.args.clone(), mani.master_seed)
                },
                vec![path],
            )
        }
    }
}

pub fn emit_csv(out: Option<&str>, csv: &str, mani: &Manifest) -> std::io::Result<()> {
    match out {
        None => {
            print!("{csv}");
            Ok(())
        }
        Some(prefix) => {
            let path = format!("{prefix}.csv");
            std::fs::write(&path, csv)?;
            write_manifest(
                prefix,
                Manifest {
                    outputs: vec![],
                    ..Manifest::new(&mani.command, mani.args.clone(), mani.master_seed)
                },
                vec![path],
            )
        }
    }
}

/// JSONL trial records plus a summary: to `<out>.jsonl` and
/// `<out>.summary.json`, or to stdout (records) and stderr (summary).
pub fn emit_trials(
    out: Option<&str>,
    results: &[TrialResult],
    summary: &serde_json::Value,
    mani: &Manifest,
) -> std::io::Result<()> {
    let mut lines = String::new();
    for r in results {
        lines.push_str(&serde_json::to_string(r).unwrap());
        lines.push('\n');
    }
    let summary_text = serde_json::to_string_pretty(summary).unwrap() + "\n";
    match out {
        None => {
            print!("{lines}");
            let mut err = std::io::stderr().lock();
            err.write_all(summary_text.as_bytes())
        }
        Some(prefix) => {
            let jsonl = format!("{prefix}.jsonl");
            let sum = format!("{prefix}.summary.json");
            std::fs::write(&jsonl, &lines)?;
            std::fs::write(&sum, &summary_text)?;
            write_manifest(
                prefix,
                Manifest {
                    outputs: vec![],
                    ..Manifest::new(&mani.command, mani.args.clone(), mani.master_seed)
                },
                vec![jsonl, sum],
            )
        }
    }
}
