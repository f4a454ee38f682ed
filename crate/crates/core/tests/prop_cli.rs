mod common;

use common::fixture;
use nambu_core::cli::run_args;
use proptest::prelude::*;

fn run(seed: u64, threads: usize, rest: &[String]) -> (i32, String) {
    let mut args = vec!["nambu".to_string(), "--seed".into(), seed.to_string(), "--threads".into(), threads.to_string()];
    args.extend(rest.iter().cloned());
    let o = run_args(args);
    (o.code, o.stdout)
}

fn command() -> impl Strategy<Value = Vec<String>> {
    proptest::sample::select(vec![
        vec!["check".to_string(), fixture("heisenberg_times_r.toml")],
        vec!["check".to_string(), fixture("scaled_x1.toml")],
        vec!["algebroid".to_string(), fixture("canonical3.toml")],
        vec!["tower".to_string(), fixture("tower_projective_x1.toml")],
        vec!["darboux".to_string(), fixture("scaled_x1.toml"), "--point".into(), "1,1/2,0".into()],
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn reports_are_byte_identical(seed in 0u64..1_000_000, threads in 2usize..=4, cmd in command()) {
        let a = run(seed, 1, &cmd);
        prop_assert_eq!(&a, &run(seed, 1, &cmd));
        prop_assert_eq!(&a, &run(seed, threads, &cmd));
    }

    #[test]
    fn witnesses_replay(seed in 0u64..1_000_000, spec in proptest::sample::select(vec!["l1_full.toml", "heisenberg_times_r.toml"])) {
        let spec = fixture(spec);
        let (_, out) = run(seed, 1, &["check".into(), spec.clone()]);
        let dir = tempfile::tempdir().unwrap();
        let w = dir.path().join("w.jsonl");
        std::fs::write(&w, &out).unwrap();
        let (code, replayed) = run(seed, 1, &["--replay".into(), w.to_str().unwrap().into(), "check".into(), spec]);
        prop_assert_eq!(code, 0, "{}", replayed);
        prop_assert!(replayed.contains("\"check\":\"replay:"));
    }
}
