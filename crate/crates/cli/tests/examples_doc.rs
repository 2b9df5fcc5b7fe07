//! Replays every command in `docs/examples.md` and compares its output.

use std::path::PathBuf;
use std::process::Command;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// `(command line, expected stdout)` for each `$ mac ...` line.
fn documented_commands(text: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut in_block = false;
    for line in text.lines() {
        if line.starts_with("```") {
            in_block = !in_block;
            continue;
        }
        if !in_block {
            continue;
        }
        match line.strip_prefix("$ ") {
            Some(cmd) => out.push((cmd.to_string(), String::new())),
            None => {
                let (_, expected) = out.last_mut().expect("output follows a command");
                expected.push_str(line);
                expected.push('\n');
            }
        }
    }
    out
}

#[test]
fn documented_examples_reproduce() {
    let text = std::fs::read_to_string(root().join("docs/examples.md")).unwrap();
    let commands = documented_commands(&text);
    assert!(commands.len() >= 10);
    for (line, expected) in commands {
        let args = shlex::split(&line).expect("well-quoted command");
        assert_eq!(args[0], "mac");
        let out = Command::new(env!("CARGO_BIN_EXE_mac"))
            .args(&args[1..])
            .current_dir(root())
            .env_remove("AMC_SEED")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{line}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8(out.stdout).unwrap(), expected, "{line}");
    }
}
