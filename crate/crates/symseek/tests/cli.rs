use std::process::Command;

use symseek::cli::{BranchReport, SolveReport};
use symseek::report::{EntryReport, RunReport, Status};

const WORKED: &str = "y'' = ((y'-1)*(x^4*y'+2*x^3*y-x^2*y+y'))/((x^2*y-1)*x^2)";

fn symseek(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_symseek"))
        .args(args)
        .env_remove("SYMSEEK_TIMEOUT")
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

#[test]
fn solve_worked_example() {
    let (code, out) = symseek(&["solve", WORKED, "--format", "json"]);
    assert_eq!(code, 0, "{}", out);
    let r: SolveReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.status, "found");
    let ode = symseek_core::odemodel::parse_ode(WORKED).unwrap();
    let got = ode.parse_expr(r.sigma.as_deref().unwrap()).unwrap();
    assert_eq!(got, ode.parse_expr("-x^2*(y'-1)/(x^2*y-1)").unwrap());
    assert!(r.symmetry.unwrap().contains("Intx("));
}

#[test]
fn solve_exit_codes() {
    assert_eq!(symseek(&["solve", "y'' = sin(x)"]).0, 1);
    assert_eq!(symseek(&["solve", "y'' = y'/("]).0, 1);
    assert_eq!(symseek(&["solve"]).0, 1);
    assert_eq!(symseek(&["solve", "y'' = y", "--strategy", "fastest"]).0, 1);
    let hard = "y'' = y^3 + x*y'^3 + y";
    let (code, out) = symseek(&["solve", hard, "--strategy", "base", "--max-degree", "1"]);
    assert_eq!(code, 3, "{}", out);
    assert!(out.contains("not-found"));
    let (code, out) = symseek(&["solve", hard, "--timeout", "0.001"]);
    assert_eq!(code, 2, "{}", out);
}

#[test]
fn solve_helmholtz_branches() {
    let (code, out) = symseek(&[
        "solve",
        "y'' = a*y' + b*y - c*y^2",
        "--params",
        "a,b,c",
        "--nonzero",
        "c",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0, "{}", out);
    let r: SolveReport = serde_json::from_str(&out).unwrap();
    let mut rels: Vec<&str> = r.branches.iter().flat_map(|b| b.relations.iter().map(|s| s.as_str())).collect();
    rels.sort();
    assert_eq!(rels, ["6*a^2 + 25*b", "6*a^2 - 25*b"]);
}

#[test]
fn verify_commands() {
    let k133 = "y'' = -(y'*(y'-1))/(x+y)";
    assert_eq!(symseek(&["verify", "sigma", k133, "y'*(y'-1)/((x+y)*(1+y'))"]).0, 0);
    let (code, out) = symseek(&["verify", "sigma", WORKED, "1"]);
    assert_eq!(code, 1);
    assert!(out.contains("residual"));
    assert_eq!(symseek(&["verify", "nu", k133, "-1-y'", "y'*(y'-1)/((x+y)*(1+y'))"]).0, 0);
    let ode1 = "y'' = -(x*y*y'-2*x*y'^2+y*y'-y'^2-y+2*y')/(x*y-1)";
    assert_eq!(symseek(&["verify", "fi", ode1, "(y-y')*exp(-x)/(x*y'-1)"]).0, 0);
    assert_eq!(symseek(&["verify", "fi", ode1, "(y-y')*exp(x)/(x*y'-1)"]).0, 1);
    assert_eq!(symseek(&["verify", "fi", ode1, "sin(y)"]).0, 1);
}

#[test]
fn corpus_command() {
    let dir = std::env::temp_dir().join(format!("symseek-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let empty = dir.join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let (code, out) = symseek(&["corpus", empty.to_str().unwrap()]);
    assert_eq!(code, 0, "{}", out);
    assert!(out.contains("0 entries"));

    let bad = dir.join("bad.json");
    std::fs::write(&bad, "[{\"id\": 1}]").unwrap();
    assert_eq!(symseek(&["corpus", bad.to_str().unwrap()]).0, 1);

    let (code, out) = symseek(&["corpus", "kamke", "--filter", "kamke-7*", "--format", "json"]);
    assert_eq!(code, 0, "{}", out);
    let r: RunReport = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = r.entries.iter().map(|e| e.id.as_str()).collect();
    assert_eq!(ids, ["kamke-78", "kamke-79"]);
    assert!(r.entries.iter().all(|e| e.status == Status::Match));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_round_trip() {
    let run = RunReport {
        entries: vec![
            EntryReport {
                id: "a".into(),
                status: Status::VerifiedDifferent,
                strategy: Some("q-u-n:z".into()),
                elapsed_ms: 12,
                sigma: Some("-1/x".into()),
                residual_zero: true,
                message: None,
            },
            EntryReport {
                id: "b".into(),
                status: Status::NotFound,
                strategy: None,
                elapsed_ms: 0,
                sigma: None,
                residual_zero: false,
                message: Some("no sigma".into()),
            },
        ],
    };
    let back: RunReport = serde_json::from_str(&serde_json::to_string(&run).unwrap()).unwrap();
    assert_eq!(back, run);
    assert_eq!(run.exit_code(), 3);

    let solve = SolveReport {
        ode: "y'' = b*y".into(),
        status: "found".into(),
        sigma: Some("-1/x".into()),
        symmetry: None,
        strategy: Some("base".into()),
        degree: Some(1),
        elapsed_ms: 3,
        branches: vec![BranchReport {
            sigma: "-1/x".into(),
            relations: vec!["b".into()],
        }],
        unresolved: vec![vec!["b^2 - 2".into()]],
        timings: vec![("base".into(), 3)],
        message: None,
    };
    let back: SolveReport = serde_json::from_str(&serde_json::to_string(&solve).unwrap()).unwrap();
    assert_eq!(back, solve);
}
