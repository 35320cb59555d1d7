//! The scenario runner used by the command-line tool, driven from code.

use hofer_forge::scenario::{run, to_json, ConfigFile, Header, ScenarioKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ConfigFile::from_toml("weights = [2, 2]\nt_nodes = 129\n")?
        .merge(&ConfigFile {
            kind: Some(ScenarioKind::Index),
            ..Default::default()
        })
        .resolve()?;
    let outcome = run(&cfg)?;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let json = to_json(&outcome, &Header::now(0.0, outcome.table.as_ref()));
    println!("report: {} bytes, first lines:", json.len());
    for line in json.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
