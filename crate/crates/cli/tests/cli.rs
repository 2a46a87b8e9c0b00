use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde::Serialize;

use empath_cli::output::*;
use empath_core::Problem;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn empath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_empath"))
        .args(args)
        .current_dir(root())
        .env_remove("EMPATH_MAX_NODES")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses `text` as `T` and checks nothing was lost on the way back.
fn round_trip<T: Serialize + DeserializeOwned>(text: &str) -> T {
    let typed: T = serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    let raw: serde_json::Value = serde_json::from_str(text).unwrap();
    assert_eq!(serde_json::to_value(&typed).unwrap(), raw);
    typed
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("empath-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn compare_bus() {
    let o = empath(&["compare", "scenarios/bus.eplan", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c: CompareOut = round_trip(&stdout(&o));
    let emp = c.empathetic_plan.unwrap();
    assert_eq!(emp[0], "inform_obs_act_businfo");
    assert_eq!(emp[1], "take_altbus_act");
    assert_eq!(c.sympathetic_plan.unwrap(), vec!["take_crowdedbus_act"]);
    assert_eq!(c.executable_in_actor_model, Executable { empathetic: true, sympathetic: false });
    assert!(c.costs.empathetic < c.costs.actor_self);
}

#[test]
fn compare_text_mentions_every_plan() {
    let o = empath(&["compare", "scenarios/safe_route.eplan"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("lit_leg1_act") && s.contains("dark_leg1_act"));
}

#[test]
fn recognize_wrong_bus() {
    let o = empath(&["recognize", "scenarios/wrong_bus.eplan", "--beta", "1.0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r: RecognizeOut = round_trip(&stdout(&o));
    assert_eq!(r.chosen, "at_act_downtown");
    assert_eq!(r.goals[0].delta, Delta::Special("-inf".into()));
    let total: f64 = r.goals.iter().map(|g| g.posterior).sum();
    assert!((total - 1.0).abs() < 1e-9);

    let text = stdout(&empath(&["recognize", "scenarios/wrong_bus.eplan", "--beta", "1.0"]));
    let first_row = text.lines().nth(1).unwrap();
    assert!(first_row.starts_with("at_act_downtown"), "{text}");
}

#[test]
fn observer_perspective_flips_the_ranking() {
    let o = empath(&["recognize", "scenarios/wrong_bus.eplan", "--perspective", "observer", "--format", "json"]);
    let r: RecognizeOut = round_trip(&stdout(&o));
    assert_eq!(r.perspective, "observer");
    assert_eq!(r.chosen, "at_act_uptown");
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = empath(&["plan", "missing.eplan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.eplan"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn parse_errors_show_a_snippet() {
    let p = scratch("broken.eplan", "(problem\n  (agents a b)\n  (atoms p)\n  (goal (or p p)))\n");
    let o = empath(&["plan", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("4:"), "{e}");
    assert!(e.contains("^"), "{e}");
}

#[test]
fn lint_errors_are_usage_errors() {
    let p = scratch("unknown.eplan", "(problem (agents a b) (atoms p) (init q) (goal p))");
    let o = empath(&["validate", p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: ValidateOut = round_trip(&stdout(&o));
    assert!(v.diagnostics.iter().any(|d| d.severity == "error" && d.message.contains("`q`")));
}

#[test]
fn unreachable_goal_exits_one() {
    let p = scratch(
        "stuck.eplan",
        "(problem (agents obs act) (atoms p q) (action x :owner act :pre q :effect p) (init (not q)) (goal p))",
    );
    let o = empath(&["plan", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no solution"));
}

#[test]
fn budget_exhaustion_exits_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_empath"))
        .args(["plan", "scenarios/bus.eplan"])
        .current_dir(root())
        .env("EMPATH_MAX_NODES", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn plan_json_and_all_optimal() {
    let o = empath(&["plan", "scenarios/bus.eplan", "--format", "json"]);
    let p: PlanOut = round_trip(&stdout(&o));
    assert_eq!(p.cost, 3);
    assert!(p.plans.is_none());
    let o = empath(&["plan", "scenarios/wrong_bus.eplan", "--all-optimal", "--format", "json", "--threads", "2"]);
    let p: PlanOut = round_trip(&stdout(&o));
    let plans = p.plans.unwrap();
    assert_eq!(plans[0], p.plan);
    assert_eq!(p.truncated, Some(false));
}

#[test]
fn empathize_and_sympathize() {
    let o = empath(&["empathize", "scenarios/grandmother.eplan", "--format", "json"]);
    let p: PlanOut = round_trip(&stdout(&o));
    assert_eq!(p.plan, vec!["send_discreet_message_obs", "speak_louder_act"]);
    let o = empath(&["sympathize", "scenarios/grandmother.eplan", "--format", "json"]);
    let p: PlanOut = round_trip(&stdout(&o));
    assert_eq!(p.plan, vec!["speak_louder_act"]);
}

#[test]
fn trace_goes_to_stderr() {
    let o = empath(&["plan", "scenarios/grandmother.eplan", "--trace", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let e = stderr(&o);
    assert!(e.starts_with("init: {"), "{e}");
    assert!(e.contains("speak_louder_act (update)"));
    round_trip::<PlanOut>(&stdout(&o));
}

#[test]
fn check_empathy_exit_codes() {
    let o = empath(&["check-empathy", "scenarios/bus.eplan", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let c: CheckOut = round_trip(&stdout(&o));
    assert!(c.selectively_task_empathetic && c.dominance_holds);

    let o = empath(&["check-empathy", "scenarios/bus_perturbed.eplan", "--actor", "scenarios/bus.actor.eplan", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let c: CheckOut = round_trip(&stdout(&o));
    assert!(!c.selectively_task_empathetic);
    assert!(c.witness.is_some());
}

#[test]
fn compare_without_actor_model_is_a_usage_error() {
    let o = empath(&["compare", "scenarios/bus_perturbed.eplan"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--actor"));
}

#[test]
fn project_output_reparses() {
    let o = empath(&["project", "scenarios/bus.eplan", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let p: ProjectOut = round_trip(&stdout(&o));
    assert_eq!(p.agent, "act");
    assert_eq!(p.depth, 1);
    let q = Problem::parse(&p.problem).unwrap();
    assert!(q.actions.get("inform_obs_act_businfo").is_none());
    assert!(q.init.facts().iter().all(|r| r.depth() == 0));
}

#[test]
fn validate_plans() {
    let ok = empath(&[
        "validate",
        "scenarios/grandmother.eplan",
        "--plan",
        "ask_if_heard_act,notice_rose_strain_act:pos,speak_louder_act",
        "--format",
        "json",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let v: ValidateOut = round_trip(&stdout(&ok));
    assert!(v.plan.unwrap().valid);

    let bad = empath(&["validate", "scenarios/grandmother.eplan", "--plan", "speak_louder_act"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("plan invalid"));

    let garbled = empath(&["validate", "scenarios/grandmother.eplan", "--plan", "a,,b"]);
    assert_eq!(garbled.status.code(), Some(2));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(empath(&["plan", "scenarios/bus.eplan", "--depth", "99"]).status.code(), Some(2));
    assert_eq!(empath(&["plan", "scenarios/bus.eplan", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(empath(&["recognize", "scenarios/wrong_bus.eplan", "--beta", "-1"]).status.code(), Some(2));
    assert_eq!(empath(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn oracle_check_small_grid() {
    let args = ["oracle-check", "--rml-depth", "1", "--max-worlds", "3", "--probes", "200", "--format", "json"];
    let o = empath(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let two: OracleOut = round_trip(&stdout(&o));
    assert!(two.grid.sound_violations.is_empty());
    assert_eq!(two.probes.missed_combinations, 0);

    let mut one_atom = args.to_vec();
    one_atom.extend(["--atoms", "1"]);
    let one: OracleOut = round_trip(&stdout(&empath(&one_atom)));
    assert!(one.grid.cases < two.grid.cases);
}

#[test]
fn oracle_query_dumps_countermodel() {
    let o = empath(&[
        "oracle-check",
        "--premise",
        "(B a p)",
        "--conclusion",
        "(B a (B b p))",
        "--dump-countermodel",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let q: QueryOut = round_trip(&stdout(&o));
    assert!(!q.oracle_entails);
    let dump = q.countermodel.unwrap();
    let (m, point) = empath_core::kripke::KripkeModel::from_dump(&dump).unwrap();
    let phi = empath_core::syntax::parse_formula("(and (B a p) (not (B a (B b p))))").unwrap();
    assert!(m.eval(&phi).unwrap() >> point.unwrap() & 1 == 1);
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for e in std::fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        if e.file_type().unwrap().is_file() {
            std::fs::copy(e.path(), to.join(e.file_name())).unwrap();
        }
    }
}

#[test]
fn scenario_goldens_are_current_and_regenerate_identically() {
    let o = empath(&["scenarios", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s: ScenariosOut = round_trip(&stdout(&o));
    assert!(s.fixtures.iter().all(|f| f.status == "ok"));
    assert_eq!(s.fixtures.len(), 5);

    let dir = std::env::temp_dir().join(format!("empath-regen-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    copy_dir(&root().join("scenarios"), &dir);
    let o = empath(&["scenarios", "--regen", "--dir", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for f in &s.fixtures {
        let name = format!("goldens/{}.json", f.name);
        let fresh = std::fs::read(dir.join(&name)).unwrap();
        let shipped = std::fs::read(root().join("scenarios").join(&name)).unwrap();
        assert_eq!(fresh, shipped, "{name}");
        round_trip::<Golden>(std::str::from_utf8(&fresh).unwrap());
    }
}
