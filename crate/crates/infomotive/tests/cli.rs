//! End-to-end checks of the `infomotive` binary: run, measure, summarize.

use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infomotive"))
}

fn write_config(dir: &Path, output: &Path) -> std::path::PathBuf {
    let path = dir.join("experiment.toml");
    let text = format!(
        r#"
            id = "cli-test"
            environment = "cartpole"
            irf = "entropy"
            gammas = [0.0, 0.0125]
            batches = 6
            runs = 2
            episode_steps = 80
            output_dir = "{}"
        "#,
        output.display()
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_then_summarize_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let config = write_config(dir.path(), &out);

    let status = binary()
        .args(["run"])
        .arg(&config)
        .args(["--workers", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("summary.csv").exists());
    assert!(out.join("provenance.toml").exists());
    assert!(out.join("run_0_1.csv").exists());
    assert!(out.join("plot_0.0125.svg").exists());

    let original_summary = std::fs::read(out.join("summary.csv")).unwrap();
    std::fs::remove_file(out.join("summary.csv")).unwrap();
    let status = binary()
        .args(["summarize"])
        .arg(&out)
        .args(["--thresholds", "5,20"])
        .status()
        .unwrap();
    assert!(status.success());
    let recomputed = std::fs::read(out.join("summary.csv")).unwrap();
    assert_eq!(original_summary, recomputed);
}

#[test]
fn run_overrides_change_scale() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let config = write_config(dir.path(), &out);
    let override_out = dir.path().join("override");

    let status = binary()
        .args(["run"])
        .arg(&config)
        .args(["--workers", "1", "--runs-override", "1", "--batches-override", "3"])
        .arg("--output")
        .arg(&override_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(!out.exists());
    let csv = std::fs::read_to_string(override_out.join("run_0_1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4, "header plus 3 batch rows");
    assert!(!override_out.join("run_0_2.csv").exists());
}

#[test]
fn measure_reports_statistics_and_pairings() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let mut body = String::from("slow[0;1],fast[0;1]\n");
    for t in 0..200 {
        body.push_str(&format!("{},{}\n", (t / 8) % 2, t % 2));
    }
    std::fs::write(&trace, body).unwrap();

    let output = binary()
        .args(["measure"])
        .arg(&trace)
        .args(["--bins", "2", "--pair", "0,1", "--bins-per-channel", "2"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("slow"), "missing channel row: {stdout}");
    assert!(stdout.contains("pairing over 1 pairs"));
    // The fast channel alternates deterministically: 1 bit of entropy and
    // of predictive information, both normalized to 1 on a 2-bin alphabet.
    let fast_line = stdout.lines().find(|l| l.starts_with("fast")).unwrap();
    assert!(fast_line.contains("1.000000"), "unexpected stats: {fast_line}");
}

#[test]
fn aborted_runs_leave_diagnostics_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let config = dir.path().join("explosive.toml");
    // A huge integration step makes the dynamics blow up to non-finite
    // values mid-episode, aborting every run.
    std::fs::write(
        &config,
        format!(
            r#"
                id = "explosive"
                environment = "cartpole"
                irf = "none"
                gammas = [0.0]
                batches = 4
                runs = 2
                episode_steps = 400
                output_dir = "{}"

                [pgpe]
                sigma_init = 40.0

                [env]
                dt = 50.0
            "#,
            out.display()
        ),
    )
    .unwrap();
    let output = binary().args(["run"]).arg(&config).output().unwrap();
    assert!(!output.status.success(), "aborted runs must exit nonzero");
    let diags: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| {
            let name = e.unwrap().file_name().to_string_lossy().into_owned();
            name.ends_with(".diag.txt").then_some(name)
        })
        .collect();
    assert_eq!(diags.len(), 2, "one diagnostic per aborted run: {diags:?}");
    let body =
        std::fs::read_to_string(out.join(&diags[0])).unwrap();
    assert!(body.contains("run aborted"), "diagnostic body: {body}");
}

#[test]
fn bad_inputs_exit_nonzero() {
    let status = binary().args(["run", "/nonexistent/config.toml"]).status().unwrap();
    assert!(!status.success());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "id = \"x\"\n").unwrap();
    let status = binary().args(["run"]).arg(&bad).status().unwrap();
    assert!(!status.success());

    let empty = tempfile::tempdir().unwrap();
    let status = binary().args(["summarize"]).arg(empty.path()).status().unwrap();
    assert!(!status.success());
}
