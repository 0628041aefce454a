use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Utc;
use fria_core::bridge;
use fria_core::catalog::{tally_catalog, CatalogFile, CatalogSet, RuleSource, SharedCatalogs};
use fria_core::fixtures;
use fria_core::intake::next_questions;
use fria_core::model::{Assessment, ChangeContext, EntityRef, EntityRole, Jurisdiction, SystemProfile};
use fria_core::necessity::evaluate_fria_necessity;
use fria_core::reporting::{
    build_notification, export_assessment, import_assessment, notification_bytes, read_report_document,
    NotificationMode,
};
use fria_core::rights_impact::{ImpactStatus, RemedialMeasure};
use fria_core::risk::RiskItem;
use fria_core::workflow;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::output::{canonical, emit, line, write_file, CliError, Format};
use crate::{CatalogCommand, Cli, Command, ImpactsCommand, Mode, NotifyArgs, ReportCommand, RisksCommand};

struct Env {
    format: Format,
    out: Option<PathBuf>,
    actor: String,
    jurisdiction: Option<String>,
    cats: Arc<CatalogSet>,
}

impl Env {
    fn ctx(&self, a: &Assessment) -> ChangeContext {
        ChangeContext::new(self.actor.clone(), Utc::now().max(a.updated_at))
    }

    fn jurisdiction(&self) -> Result<Jurisdiction, CliError> {
        let code = self
            .jurisdiction
            .as_deref()
            .ok_or_else(|| CliError::Usage("--jurisdiction is required for this command".into()))?;
        code.parse().map_err(|e: fria_core::model::UnknownJurisdiction| CliError::Usage(e.to_string()))
    }

    /// Writes the updated assessment to --out, or back over `input`.
    fn save(&self, input: &Path, a: &Assessment) -> Result<(), CliError> {
        write_file(self.out.as_deref().unwrap_or(input), &export_assessment(a))
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = read(path)?;
    serde_json::from_slice(&bytes).map_err(|e| {
        let code = if e.is_data() { "validation" } else { "bad_request" };
        CliError::failed(code, format!("{}: {e}", path.display()))
    })
}

fn load(path: &Path) -> Result<Assessment, CliError> {
    import_assessment(&read(path)?).map_err(|e| CliError::failed("bad_document", format!("{}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cats = match &cli.catalog {
        Some(dir) => Arc::new(CatalogSet::from_dir(dir).map_err(|e| CliError::failed("catalog", e.to_string()))?),
        None => CatalogSet::seed(),
    };
    let env = Env {
        format: cli.format,
        out: cli.out,
        actor: cli.actor,
        jurisdiction: cli.jurisdiction,
        cats,
    };
    match cli.command {
        Command::Check { profile, id } => check(&env, &profile, &id),
        Command::ImportDpia { assessment, dpia } => import_dpia(&env, &assessment, &dpia),
        Command::SkipDpia { assessment } => {
            let a = load(&assessment)?;
            let next = workflow::skip_dpia(&a, &env.ctx(&a))?;
            env.save(&assessment, &next)?;
            print_stages(&env, &next);
            Ok(())
        }
        Command::Gaps { assessment } => {
            let a = load(&assessment)?;
            let gaps = workflow::current_gaps(&a, &env.cats);
            emit(env.format, &gaps, |s| {
                for g in gaps.paths() {
                    line(s, format_args!("{}", canonical_line(g)));
                }
            });
            Ok(())
        }
        Command::Assess { assessment, answers } => assess(&env, &assessment, &answers),
        Command::Risks(RisksCommand::Score {
            assessment,
            risks,
            suggest,
        }) => score_risks(&env, &assessment, risks.as_deref(), suggest),
        Command::Impacts(ImpactsCommand::Derive { assessment, decisions }) => {
            derive_impacts(&env, &assessment, decisions.as_deref())
        }
        Command::Report(ReportCommand::Compile { assessment }) => compile_report(&env, &assessment),
        Command::Notify(args) => notify(&env, args),
        Command::Catalog(CatalogCommand::Validate { files }) => validate_catalogs(&env, &files),
        Command::Catalog(CatalogCommand::Tally { source }) => {
            let source: RuleSource = source.parse().map_err(CliError::Usage)?;
            let t = tally_catalog(&env.cats.conditions, source);
            emit(env.format, &t, |s| {
                line(s, format_args!("source        {source}"));
                line(s, format_args!("total         {}", t.total));
                line(s, format_args!("required      {}", t.required));
                line(s, format_args!("conditional   {}", t.conditional));
                line(s, format_args!("not required  {}", t.not_required));
                line(s, format_args!("exempt        {}", t.exempt));
            });
            Ok(())
        }
        Command::Serve { addr, data, token } => serve(env.cats, &addr, &data, token),
        Command::Demo { dir } => demo(&env, &dir),
    }
}

fn canonical_line(v: &impl serde::Serialize) -> String {
    String::from_utf8_lossy(&canonical(v)).into_owned()
}

fn print_stages(env: &Env, a: &Assessment) {
    let stages = workflow::stage_summary(a);
    emit(env.format, &json!({ "id": a.id, "stages": stages }), |s| {
        for st in &stages {
            line(s, format_args!("stage {}  {:?}", st.stage, st.state));
        }
    });
}

fn check(env: &Env, profile: &Path, id: &str) -> Result<(), CliError> {
    let j = env.jurisdiction()?;
    let p: SystemProfile = read_json(profile)?;
    let decision = match &env.out {
        Some(out) => {
            let ctx = ChangeContext::new(env.actor.clone(), Utc::now());
            let a = workflow::submit_profile(&Assessment::new(id, j, &ctx), p, &env.cats, &ctx)?;
            write_file(out, &export_assessment(&a))?;
            a.necessity.expect("set by stage 1")
        }
        None => evaluate_fria_necessity(&p, j, &env.cats.conditions).map_err(fria_core::WorkflowError::from)?,
    };
    emit(env.format, &decision, |s| {
        line(s, format_args!("FRIA {}", decision.outcome));
        for r in &decision.fired_rules {
            line(s, format_args!("  {}  {}", r.rule_id, r.outcome));
        }
        for c in &decision.open_conditions {
            line(s, format_args!("  open: {c}"));
        }
    });
    Ok(())
}

fn import_dpia(env: &Env, path: &Path, dpia: &Path) -> Result<(), CliError> {
    let a = load(path)?;
    let imported = bridge::import_dpia(&read(dpia)?).map_err(fria_core::WorkflowError::from)?;
    let (next, prefill) = workflow::import_dpia(&a, imported.dpia, &env.cats, &env.ctx(&a))?;
    env.save(path, &next)?;
    let gaps = workflow::current_gaps(&next, &env.cats);
    let out = json!({
        "prefilled": prefill.provenance.keys().collect::<Vec<_>>(),
        "conflicts": prefill.conflicts,
        "warnings": imported.report.violations,
        "gaps": gaps,
    });
    emit(env.format, &out, |s| {
        line(s, format_args!("prefilled {} field(s)", prefill.provenance.len()));
        for c in &prefill.conflicts {
            line(s, format_args!("conflict  {}", canonical_line(c)));
        }
        for w in &imported.report.violations {
            line(s, format_args!("warning   {w}"));
        }
        line(s, format_args!("{} gap(s) left", gaps.paths().count()));
    });
    Ok(())
}

/// Answers as `{"Q1.1": value, ...}` or `[{"question_id": .., "value": ..}]`.
#[derive(Deserialize)]
#[serde(untagged)]
enum AnswerFile {
    List(Vec<AnswerItem>),
    Map(BTreeMap<String, Value>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerItem {
    question_id: String,
    value: Value,
}

fn assess(env: &Env, path: &Path, answers: &Path) -> Result<(), CliError> {
    let a = load(path)?;
    let pairs: Vec<(String, Value)> = match read_json(answers)? {
        AnswerFile::List(items) => items.into_iter().map(|i| (i.question_id, i.value)).collect(),
        AnswerFile::Map(m) => m.into_iter().collect(),
    };
    let next = workflow::submit_answers(&a, &env.cats, &pairs, &env.ctx(&a))?;
    env.save(path, &next)?;
    let open = next_questions(&next, &env.cats.questionnaire).map_err(fria_core::WorkflowError::from)?;
    emit(env.format, &json!({ "answered": pairs.len(), "open_questions": open }), |s| {
        line(s, format_args!("{} answer(s) recorded, {} question(s) open", pairs.len(), open.len()));
        for q in &open {
            line(s, format_args!("  {}  {}", q.id, q.target_path));
        }
    });
    Ok(())
}

fn score_risks(env: &Env, path: &Path, risks: Option<&Path>, suggest: bool) -> Result<(), CliError> {
    let mut a = load(path)?;
    if suggest {
        a = workflow::suggest_risks(&a, &env.cats, &env.ctx(&a))?;
    }
    if let Some(file) = risks {
        let items: Vec<RiskItem> = read_json(file)?;
        for r in items {
            a = workflow::put_risk(&a, r, &env.cats, &env.ctx(&a))?;
        }
    }
    env.save(path, &a)?;
    let rows: Vec<Value> = a
        .risks
        .iter()
        .map(|r| {
            let initial = match (r.likelihood, r.severity) {
                (Some(l), Some(s)) => env.cats.matrix.level(l, s).ok(),
                _ => None,
            };
            json!({ "id": r.id, "initial": initial, "residual": r.residual })
        })
        .collect();
    emit(env.format, &json!({ "risks": rows }), |s| {
        for r in &rows {
            let level = |v: &Value| v.as_str().unwrap_or("unscored").to_string();
            line(
                s,
                format_args!(
                    "{}  initial {}  residual {}",
                    r["id"].as_str().unwrap_or_default(),
                    level(&r["initial"]),
                    level(&r["residual"]["level"])
                ),
            );
        }
    });
    Ok(())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct Decision {
    #[serde(default)]
    status: Option<ImpactStatus>,
    /// Indices of suggested remedies to adopt.
    #[serde(default)]
    adopt: Vec<usize>,
    #[serde(default)]
    add: Vec<RemedialMeasure>,
}

fn derive_impacts(env: &Env, path: &Path, decisions: Option<&Path>) -> Result<(), CliError> {
    let mut a = load(path)?;
    if !a.stage(3).is_settled() {
        a = workflow::complete_information_gathering(&a, &env.cats, &env.ctx(&a))?;
    }
    a = workflow::derive_impacts(&a, &env.cats, &env.ctx(&a))?;
    if let Some(file) = decisions {
        let all: BTreeMap<String, Decision> = read_json(file)?;
        for (id, d) in all {
            for r in d.add {
                a = workflow::add_remedy(&a, &id, r, &env.ctx(&a))?;
            }
            for i in d.adopt {
                a = workflow::adopt_remedy(&a, &id, i, &env.ctx(&a))?;
            }
            if let Some(st) = d.status {
                a = workflow::set_impact_status(&a, &id, st, &env.ctx(&a))?;
            }
        }
    }
    let open = a.impacts.iter().filter(|i| i.status == ImpactStatus::Open).count();
    if open == 0 {
        a = workflow::complete_rights_assessment(&a, &env.ctx(&a))?;
    }
    env.save(path, &a)?;
    emit(
        env.format,
        &json!({ "impacts": a.impacts, "leftovers": a.impact_leftovers, "open": open }),
        |s| {
            for i in &a.impacts {
                let cats: Vec<String> = i.categories.iter().map(|c| c.to_string()).collect();
                line(
                    s,
                    format_args!("{}  Art.{}  {}  {:?}", i.id, i.right.charter_article, cats.join(","), i.status),
                );
                if let Some(e) = &i.escalates_to {
                    line(s, format_args!("    may escalate to {}", e.category));
                }
                for (n, m) in i.remedial_measures.iter().enumerate() {
                    let tag = if m.draft { "suggested" } else { "adopted" };
                    line(s, format_args!("    [{n}] {tag}: {}", m.description));
                }
            }
            if open > 0 {
                line(s, format_args!("{open} impact(s) still open; stage 4 stays in progress"));
            }
        },
    );
    Ok(())
}

fn compile_report(env: &Env, path: &Path) -> Result<(), CliError> {
    let a = load(path)?;
    let report = workflow::compile_report(&a, &env.cats, &env.actor)?;
    let next = workflow::close_with_report(&a, &report.checksum, &env.ctx(&a))?;
    write_file(path, &export_assessment(&next))?;
    match &env.out {
        Some(out) => {
            write_file(out, &report.bytes)?;
            emit(env.format, &json!({ "checksum": report.checksum }), |s| {
                line(s, format_args!("report {} written to {}", report.checksum, out.display()));
            });
        }
        None => println!("{}", String::from_utf8_lossy(&report.bytes)),
    }
    Ok(())
}

fn notify(env: &Env, args: NotifyArgs) -> Result<(), CliError> {
    if !args.dry_run {
        return Err(CliError::Usage("only --dry-run is supported; nothing is ever transmitted".into()));
    }
    let bytes = read(&args.report)?;
    let report =
        read_report_document(&bytes).map_err(|e| CliError::failed("bad_document", format!("{}: {e}", args.report.display())))?;
    let mode = match args.mode {
        Mode::MarketSurveillance => NotificationMode::MarketSurveillanceNotification,
        Mode::SelfAssessment => NotificationMode::SelfAssessmentRecord,
    };
    let submitter = EntityRef::new(args.submitter_id, args.submitter_name, &[EntityRole::Deployer]);
    let payload = build_notification(&report, args.authority.as_deref(), mode, submitter, Utc::now())
        .map_err(|e| CliError::failed("validation", e.to_string()))?;
    let out = notification_bytes(&payload);
    match &env.out {
        Some(path) => write_file(path, &out),
        None => {
            println!("{}", String::from_utf8_lossy(&out));
            Ok(())
        }
    }
}

fn validate_catalogs(env: &Env, files: &[PathBuf]) -> Result<(), CliError> {
    let mut results = Vec::new();
    let mut failed = 0;
    for path in files {
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        let kind: CatalogFile = name
            .parse()
            .map_err(|e: String| CliError::Usage(format!("{}: {e}", path.display())))?;
        match env.cats.validate_file(kind, &read(path)?) {
            Ok(version) => results.push(json!({ "file": path, "catalog": kind.name(), "version": version })),
            Err(e) => {
                failed += 1;
                results.push(json!({ "file": path, "catalog": kind.name(), "error": e.to_string() }));
            }
        }
    }
    emit(env.format, &results, |s| {
        for r in &results {
            match r.get("error") {
                Some(e) => line(s, format_args!("FAIL {}  {}", r["file"].as_str().unwrap_or(""), e.as_str().unwrap_or(""))),
                None => line(
                    s,
                    format_args!("ok   {}  version {}", r["file"].as_str().unwrap_or(""), r["version"].as_str().unwrap_or("")),
                ),
            }
        }
    });
    if failed > 0 {
        return Err(CliError::failed("catalog", format!("{failed} of {} catalog file(s) failed", files.len())));
    }
    Ok(())
}

fn serve(cats: Arc<CatalogSet>, addr: &str, data: &Path, token: Option<String>) -> Result<(), CliError> {
    let store = fria_gateway::FsStore::open(data).map_err(|e| CliError::Usage(format!("{}: {e}", data.display())))?;
    let mut state = fria_gateway::AppState::new(Arc::new(store)).with_catalogs(SharedCatalogs::new(cats));
    if let Some(t) = token {
        state = state.with_token(t);
    }
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Usage(format!("cannot listen on {addr}: {e}")))?;
        eprintln!("listening on http://{}/api/v1", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
        fria_gateway::serve(listener, state)
            .await
            .map_err(|e| CliError::failed("io", e.to_string()))
    })
}

/// The passport example as input files, plus a decisions file that resolves
/// every impact with its first suggested remedy.
fn demo(env: &Env, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())))?;
    let stage4 = fixtures::passport_assessment(&env.cats, 4)?;
    let decisions: BTreeMap<&str, Value> = stage4
        .impacts
        .iter()
        .map(|i| (i.id.as_str(), json!({ "adopt": [0], "status": "Resolved" })))
        .collect();
    let answers: Vec<Value> = fixtures::passport_answers()
        .into_iter()
        .map(|(q, v)| json!({ "question_id": q, "value": v }))
        .collect();
    let files: [(&str, Vec<u8>); 5] = [
        ("profile.json", canonical(&fixtures::passport_profile())),
        ("dpia.json", bridge::export_minimal_dpia(&fixtures::passport_dpia())),
        ("answers.json", canonical(&answers)),
        ("risks.json", canonical(&fixtures::passport_risks())),
        ("decisions.json", canonical(&decisions)),
    ];
    let mut written = Vec::new();
    for (name, bytes) in files {
        let p = dir.join(name);
        write_file(&p, &bytes)?;
        written.push(p);
    }
    emit(env.format, &written, |s| {
        for p in &written {
            line(s, format_args!("{}", p.display()));
        }
    });
    Ok(())
}
