use std::process::{Command, Output};

use powcirc::powercircuit::{Marking, PowerCircuit};

fn powcirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_powcirc"))
        .args(args)
        .env_remove("POWCIRC_SEED")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    powcirc(args).status.code().expect("exited normally")
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(powcirc(args).stdout).expect("utf-8 output")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["wp", "-q", "2", "b a B T"]), 0);
    assert_eq!(code(&["wp", "-q", "2", "a"]), 1);
    assert_eq!(code(&["member", "-q", "-2", "b a B t^3"]), 0);
    assert_eq!(code(&["member", "-q", "2", "b"]), 1);
    assert_eq!(code(&["conj", "-q", "2", "B a", "B t"]), 0);
    assert_eq!(code(&["conj", "-q", "2", "b", "B"]), 1);
    assert_eq!(code(&["conj", "-q", "2", "a", "a^2"]), 2);
    assert_eq!(code(&["conj-fixed", "-q", "2", "t t", "t"]), 0);
    assert_eq!(code(&["conj-fixed", "-q", "2", "t^3", "t"]), 1);
    assert_eq!(code(&["conj-fixed", "-q", "-2", "t", "t"]), 3);
    assert_eq!(code(&["conj-fixed", "-q", "-2", "--allow-negative", "t", "t"]), 0);
    assert_eq!(code(&["wp", "-q", "1", "a"]), 64);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["wp", "-q", "2", "a x"]), 65);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn answers_on_stdout() {
    assert_eq!(stdout(&["wp", "-q", "2", "b a B T"]).trim(), "identity");
    assert_eq!(stdout(&["member", "-q", "-2", "b a B t^3"]).trim(), "(0, 4)");
    let err = powcirc(&["wp", "-q", "2", "a x"]).stderr;
    assert!(String::from_utf8_lossy(&err).contains('2'), "error names the offending position");
}

#[test]
fn reduce_dump_round_trips() {
    for (q, word) in [(2i64, "b t a T B a^5 t"), (3, "b a B b t B a"), (-2, "b a^3 B t^-2 b")] {
        let q_arg = q.to_string();
        let out = stdout(&["reduce", "-q", &q_arg, word]);
        let (header, dump) = out.split_once('\n').expect("word line then dump");
        assert!(header.starts_with("word: "));
        let parsed = PowerCircuit::parse_dump(q.unsigned_abs() as u32, dump).expect("dump parses");
        let named: Vec<(&str, &Marking)> = parsed.markings.iter().map(|(n, m)| (n.as_str(), m)).collect();
        assert_eq!(parsed.circuit.dump(&named), dump);
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let one = stdout(&["selftest", "--cases", "200", "--threads", "1"]);
    let four = stdout(&["selftest", "--cases", "200", "--threads", "4"]);
    assert_eq!(one, four);
    assert!(one.lines().all(|l| l.starts_with("PASS")), "{one}");

    // the last column is wall time
    let strip = |s: String| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    let bench = ["bench", "-q", "2,3", "--tower-max", "5", "--lengths", "64,256"];
    let one = strip(stdout(&[&bench[..], &["--threads", "1"]].concat()));
    let three = strip(stdout(&[&bench[..], &["--threads", "3"]].concat()));
    assert_eq!(one, three);
}

#[test]
fn seed_flag_and_env_agree() {
    let a = stdout(&["bench", "-q", "2", "--tower-max", "0", "--lengths", "128", "--seed", "7"]);
    let b = Command::new(env!("CARGO_BIN_EXE_powcirc"))
        .args(["bench", "-q", "2", "--tower-max", "0", "--lengths", "128"])
        .env("POWCIRC_SEED", "7")
        .output()
        .expect("binary runs");
    let cols = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    assert_eq!(cols(&a), cols(&String::from_utf8(b.stdout).expect("utf-8 output")));
}
