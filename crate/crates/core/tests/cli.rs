use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

mod common;

const BIN: &str = env!("CARGO_BIN_EXE_hearing-features");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn score_engagement_matches_hand_scored_golden() {
    let out = tempfile::tempdir().unwrap();
    let result = run(&[
        "score-engagement",
        "--hearings",
        arg(&fixture("engagement_three_hearings.jsonl")),
        "--out-dir",
        arg(out.path()),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let got = fs::read_to_string(out.path().join("engagement.csv")).unwrap();
    let want = fs::read_to_string(fixture("engagement_three_hearings.expected.csv")).unwrap();
    assert_eq!(got, want);
    let stats = fs::read_to_string(out.path().join("filter_stats.csv")).unwrap();
    assert!(stats.ends_with("engagement,3,0,0,0,1,2\n"), "{stats}");
    // progress goes to stderr, the table to stdout
    assert!(String::from_utf8_lossy(&result.stderr).contains("engagement filter"));
    assert!(String::from_utf8_lossy(&result.stdout).contains("Ben Brooks"));
}

#[test]
fn evaluate_perfect_extractor_reports_f1_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("registry.txt"),
        "Sierra Water Alliance\nBay Housing Council\n",
    )
    .unwrap();
    let labeled = [
        r#"{"comment":"Ana Ruiz with Sierra Water Alliance, in support.","speaker_name":"Ana Ruiz","truth":["Sierra Water Alliance"]}"#,
        r#"{"comment":"Bo Tran on behalf of Bay Housing Council, in opposition.","speaker_name":"Bo Tran","truth":["Bay Housing Council"]}"#,
        r#"{"comment":"I support this bill.","truth":[]}"#,
    ];
    fs::write(dir.path().join("labeled.jsonl"), labeled.join("\n")).unwrap();
    let out = dir.path().join("out");
    let result = run(&[
        "evaluate",
        "--labeled",
        arg(&dir.path().join("labeled.jsonl")),
        "--registry",
        arg(&dir.path().join("registry.txt")),
        "--out-dir",
        arg(&out),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.contains("combined,2,0,0,1.0000"), "{metrics}");
    assert_eq!(
        fs::read_to_string(out.join("unresolved.csv")).unwrap(),
        "extracted,nearest_truth\n"
    );
}

#[test]
fn rank_exclusion_list_removes_members() {
    let dir = tempfile::tempdir().unwrap();
    let registry = dir.path().join("registry.txt");
    fs::write(&registry, "Riverside Library Alliance\n").unwrap();
    let exclusions = dir.path().join("exclusions.txt");
    fs::write(&exclusions, "# manual false positives\nMembers\n").unwrap();
    let hearings = fixture("five_hearings.jsonl");

    let plain = dir.path().join("plain");
    let result = run(&[
        "rank",
        "--hearings",
        arg(&hearings),
        "--registry",
        arg(&registry),
        "--out-dir",
        arg(&plain),
    ]);
    assert!(result.status.success());
    let orgs = fs::read_to_string(plain.join("org_rankings.csv")).unwrap();
    assert!(orgs.contains("Members"), "{orgs}");

    let excluded = dir.path().join("excluded");
    let result = run(&[
        "rank",
        "--hearings",
        arg(&hearings),
        "--registry",
        arg(&registry),
        "--exclusions",
        arg(&exclusions),
        "--out-dir",
        arg(&excluded),
    ]);
    assert!(result.status.success());
    let orgs = fs::read_to_string(excluded.join("org_rankings.csv")).unwrap();
    assert_eq!(
        orgs,
        "rank,organization,hearings\n1,Riverside Library Alliance,2\n"
    );
    for name in ["engagement_rankings.csv", "filter_stats.csv"] {
        assert!(excluded.join(name).exists(), "{name}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["rank", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let missing = run(&[
        "score-engagement",
        "--hearings",
        "/definitely/missing.jsonl",
        "--out-dir",
        "/tmp/unused-hf",
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/definitely/missing.jsonl"));

    let required = run(&["score-engagement"]);
    assert_eq!(required.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&required.stderr).contains("--hearings"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    fs::write(&bad, "{\"id\":\"x\"}\n").unwrap();
    let result = run(&[
        "detect-absences",
        "--hearings",
        arg(&bad),
        "--out-dir",
        arg(dir.path()),
    ]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("bad.jsonl:1"));

    let negative = run(&[
        "score-engagement",
        "--alpha=-1",
        "--hearings",
        arg(&fixture("engagement_three_hearings.jsonl")),
    ]);
    assert_eq!(negative.status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    let out = dir.path().join("out");
    fs::write(
        &config,
        format!(
            "hearings={}\nout-dir={}\nalpha=0\n",
            arg(&fixture("engagement_three_hearings.jsonl")),
            arg(&out)
        ),
    )
    .unwrap();
    let result = run(&["score-engagement", "--config", arg(&config), "-q"]);
    assert!(result.status.success());
    let zero_alpha = fs::read_to_string(out.join("engagement.csv")).unwrap();
    assert!(
        zero_alpha.contains("1,ben,Ben Brooks,0.032150,0.000000"),
        "{zero_alpha}"
    );

    let result = run(&[
        "score-engagement",
        "--config",
        arg(&config),
        "--alpha",
        "0.5",
        "-q",
    ]);
    assert!(result.status.success());
    assert_eq!(
        fs::read_to_string(out.join("engagement.csv")).unwrap(),
        fs::read_to_string(fixture("engagement_three_hearings.expected.csv")).unwrap()
    );
}

#[test]
fn stance_train_save_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    let labeled = dir.path().join("stance.tsv");
    let samples: Vec<String> = common::stance_samples(300, 3)
        .into_iter()
        .map(|(c, l)| format!("{c}\t{l}"))
        .collect();
    fs::write(&labeled, samples.join("\n")).unwrap();
    let tree = dir.path().join("stance.tree");
    let out = dir.path().join("out");
    let result = run(&[
        "classify-stance",
        "--labeled",
        arg(&labeled),
        "--save-tree",
        arg(&tree),
        "--hearings",
        arg(&fixture("five_hearings.jsonl")),
        "--out-dir",
        arg(&out),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(fs::read_to_string(&tree)
        .unwrap()
        .starts_with("stance-tree 1\n"));
    let stances = fs::read_to_string(out.join("stances.csv")).unwrap();
    assert!(stances.contains("t1,2,pub1,support,0,1,0,0,0"), "{stances}");
    assert!(stances.contains("t1,3,pub2,oppose,1,0,0,0,0"), "{stances}");

    let reload = dir.path().join("reload");
    let result = run(&[
        "classify-stance",
        "--tree",
        arg(&tree),
        "--hearings",
        arg(&fixture("five_hearings.jsonl")),
        "--out-dir",
        arg(&reload),
    ]);
    assert!(result.status.success());
    assert_eq!(
        stances,
        fs::read_to_string(reload.join("stances.csv")).unwrap()
    );
}

#[test]
fn gen_training_data_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let registry = common::registry(10, 1);
    fs::write(
        dir.path().join("registry.txt"),
        registry.entries().join("\n"),
    )
    .unwrap();
    let comments: Vec<String> = common::tagged_comments(7, &registry, 2)
        .iter()
        .map(|c| serde_json::to_string(c).unwrap())
        .collect();
    fs::write(dir.path().join("tagged.jsonl"), comments.join("\n")).unwrap();
    let out = dir.path().join("out");
    let result = run(&[
        "gen-training-data",
        "--comments",
        arg(&dir.path().join("tagged.jsonl")),
        "--registry",
        arg(&dir.path().join("registry.txt")),
        "--out-dir",
        arg(&out),
    ]);
    assert!(
        result.status.success(),
        "{}",
        String::from_utf8_lossy(&result.stderr)
    );
    let sentences = |name: &str| {
        fs::read_to_string(out.join(name))
            .unwrap()
            .split("\n\n")
            .filter(|s| !s.trim().is_empty())
            .count()
    };
    assert_eq!(sentences("recall_corpus.tsv"), 700);
    // 7 comments cycle through 0, 1 and 2 slots: 3 have none
    assert_eq!(sentences("precision_corpus.tsv"), 10 * 4 + 3);
}
