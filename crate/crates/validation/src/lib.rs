//! Helpers for the acceptance suite in `tests/acceptance.rs`.

use std::path::PathBuf;
use std::process::Command;

/// Path to the `fracvim` binary of the current build, building it first
/// when this package is tested on its own.
pub fn cli_binary() -> PathBuf {
    let exe = std::env::current_exe().expect("test executable path");
    // target/<profile>/deps/<test> -> target/<profile>/fracvim
    let profile_dir = exe.parent().and_then(|d| d.parent()).expect("target layout");
    let bin = profile_dir.join(format!("fracvim{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let profile = profile_dir.file_name().and_then(|n| n.to_str()).unwrap_or("debug");
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "fracvim-cli", "--bin", "fracvim"]);
        if profile == "release" {
            cmd.arg("--release");
        }
        let status = cmd.status().expect("cargo runs");
        assert!(status.success(), "building the fracvim binary failed");
    }
    bin
}
