use std::path::Path;

use anyhow::{anyhow, bail, Context as _};
use serde_json::{json, Value};

use cinf_core::expr::{Point, ZeroTester};
use cinf_core::factors::{
    check_relative_integrating_factor, check_symmetrizing_factor, factor_to_integrating, integrating_to_factor,
    Evidence, FactorCertificate, FactorError,
};
use cinf_core::reduction::{build_solvable_structure, verify_integral_manifold, ReductionError};
use cinf_core::scenario::{Scenario, StructureOrScenario};
use cinf_core::structures::{
    check_annihilation, check_independent, check_involutive, dual_one_forms, CinfStructure, DualForms,
};
use cinf_core::Expr;

use crate::{CheckKind, Direction, FactorKindArg, GlobalOpts};

/// Text lines, JSON document and exit code of one command.
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
    pub json: Value,
}

impl Outcome {
    fn new(command: &str) -> Self {
        Outcome { code: 0, lines: Vec::new(), json: json!({ "command": command }) }
    }

    fn set(&mut self, key: &str, v: Value) {
        self.json[key] = v;
    }

    fn fail(&mut self, msg: String, witness: Option<&Point>) {
        self.code = 1;
        self.lines.push(format!("REFUTED: {msg}"));
        if let Some(w) = witness {
            self.lines.push(format!("witness: {w}"));
        }
        self.set("error", json!({ "message": msg, "witness": witness.map(|w| w.to_json()) }));
    }

    fn finish(mut self) -> Self {
        let status = if self.code == 0 { "certified" } else { "refuted" };
        self.set("status", json!(status));
        self.set("exit_code", json!(self.code));
        self
    }
}

pub fn load(path: &Path, o: &GlobalOpts) -> anyhow::Result<Scenario> {
    let mut sc = Scenario::load(path)?;
    if let Some(s) = o.seed {
        sc.policy.seed = s;
    }
    if let Some(n) = o.samples {
        if n == 0 {
            bail!("--samples must be positive");
        }
        sc.policy.samples = n;
    }
    if let Some(t) = o.tol {
        if !(t > 0.0) {
            bail!("--tol must be positive");
        }
        sc.policy.tol = t;
    }
    Ok(sc)
}

pub fn write_report(path: &Path, out: &Outcome) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(&out.json)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    let txt = path.with_extension("txt");
    std::fs::write(&txt, out.lines.join("\n") + "\n").with_context(|| format!("writing {}", txt.display()))?;
    Ok(())
}

/// Refutations become exit 1, input problems an error (exit 2).
fn triage(out: &mut Outcome, e: StructureOrScenario) -> anyhow::Result<()> {
    if e.is_input_error() {
        return Err(anyhow!(e));
    }
    out.fail(e.to_string(), e.witness());
    Ok(())
}

fn evidence_lines(ev: &[Evidence]) -> Vec<String> {
    ev.iter().map(|e| format!("  {}: {}", e.identity, e.certainty)).collect()
}

fn first_witness(ev: &[Evidence]) -> Option<&Point> {
    ev.iter().find(|e| !e.certainty.holds()).and_then(|e| e.certainty.witness())
}

fn structure(sc: &Scenario, t: &ZeroTester, out: &mut Outcome) -> anyhow::Result<Option<(CinfStructure, DualForms)>> {
    let s = match sc.cinf_structure(t) {
        Ok(s) => s,
        Err(e) => {
            triage(out, e)?;
            return Ok(None);
        }
    };
    match dual_one_forms(&s, t) {
        Ok(d) => Ok(Some((s, d))),
        Err(e) => {
            triage(out, e.into())?;
            Ok(None)
        }
    }
}

pub fn check(sc: &Scenario, what: CheckKind) -> anyhow::Result<Outcome> {
    let t = sc.tester();
    let mut out = Outcome::new("check");
    match what {
        CheckKind::Involutive => {
            out.set("check", json!("involutive"));
            let d = sc.distribution()?;
            match check_involutive(&d, &t) {
                Ok(cert) => {
                    out.lines.extend(cert.lines(&d));
                    out.set("brackets", cert.to_json(&d));
                    if let Some(p) = cert.pairs.iter().find(|p| !p.residual.holds()) {
                        let msg = format!("[{},{}] residual does not vanish", d.names()[p.i], d.names()[p.j]);
                        out.fail(msg, p.residual.witness());
                    } else {
                        out.lines.push("involutive: certified".into());
                    }
                }
                Err(e) => triage(&mut out, e.into())?,
            }
        }
        CheckKind::Independence => {
            out.set("check", json!("independence"));
            let d = sc.distribution()?;
            let (fields, names) = sc.structure_fields()?;
            let mut all: Vec<_> = d.gens().iter().collect();
            all.extend(fields.iter());
            let mut all_names = d.names().to_vec();
            all_names.extend(names);
            let rc = check_independent(&all, &t)?;
            out.lines.push(format!("fields: {}", all_names.join(", ")));
            out.lines.push(format!("rank {} of {}; minor = {}", rc.rank, rc.expected, rc.minor));
            if let Some(w) = &rc.witness {
                out.lines.push(format!("minor non-zero at {w}"));
            }
            out.set("independence", rc.to_json());
            if !rc.full() {
                out.fail(format!("fields are dependent: rank {} < {}", rc.rank, rc.expected), None);
            }
        }
        CheckKind::CinfStructure => {
            out.set("check", json!("cinf-structure"));
            if let Some((s, d)) = structure(sc, &t, &mut out)? {
                for l in &s.levels {
                    out.lines.extend(l.lines());
                }
                out.lines.push(format!("Delta = {}", d.delta));
                for (i, w) in d.omegas.iter().enumerate() {
                    out.lines.push(format!("omega{} = {w}", i + 1));
                }
                let loci = s.loci();
                if !loci.is_empty() {
                    let l: Vec<String> = loci.iter().map(|e| format!("{e} != 0")).collect();
                    out.lines.push(format!("valid where {}", l.join(", ")));
                }
                let ann = check_annihilation(&s, &d, &t)?;
                out.lines.push(format!("annihilation: {ann}"));
                out.set("structure", s.to_json());
                out.set("dual", d.to_json());
                let bad = s.levels.iter().flat_map(|l| &l.entries).find(|e| !e.residual.holds());
                if let Some(e) = bad {
                    out.fail(format!("decomposition residual against {} does not vanish", e.against), e.residual.witness());
                } else if !ann.holds() {
                    out.fail("dual forms do not annihilate the distribution".into(), ann.witness());
                } else {
                    out.lines.push("C-infinity structure: certified".into());
                }
            }
        }
    }
    Ok(out.finish())
}

pub fn reduce(sc: &Scenario) -> anyhow::Result<Outcome> {
    let t = sc.tester();
    let mut out = Outcome::new("reduce");
    let Some((s, _)) = structure(sc, &t, &mut out)? else {
        return Ok(out.finish());
    };
    let (state, err) = sc.run_reduction(&s, &t);
    if let Some(st) = &state {
        for step in &st.steps {
            let k = step.level;
            out.lines.push(format!("level {k}: I{k} = {} = {}", step.integral, step.constant));
            out.lines.extend(evidence_lines(&step.certificate.evidence));
            out.lines.extend(evidence_lines(&step.checks));
            out.lines.push(format!("  iota{k} = {}", step.iota));
            if let Some(m) = &step.reduced_factor {
                out.lines.push(format!("  dI{k} = ({m}) * omega{k}"));
            }
        }
        for (i, w) in st.forms.iter().enumerate() {
            out.lines.push(format!("remaining omega{} = {w}", i + 1));
        }
        out.set("reduction", st.to_json());
    }
    if let Some(e) = err {
        triage(&mut out, e)?;
        return Ok(out.finish());
    }
    let st = state.expect("state exists without error");
    match st.final_report() {
        Ok(rep) => {
            out.lines.push("integral manifolds:".into());
            out.lines.extend(rep.lines().into_iter().map(|l| format!("  {l}")));
            match verify_integral_manifold(&s.dist, &st.dual.omegas, &st.composed, &t) {
                Ok(cert) => {
                    out.lines.extend(evidence_lines(&cert.pullbacks));
                    out.set("manifold_check", cert.to_json());
                    if !cert.valid() {
                        out.fail("composed parametrization is not an integral manifold".into(), first_witness(&cert.pullbacks));
                    }
                }
                Err(e) => triage(&mut out, e.into())?,
            }
        }
        Err(ReductionError::Incomplete { remaining }) => {
            out.fail(format!("reduction script incomplete: {remaining} level(s) remain"), None);
        }
        Err(e) => triage(&mut out, e.into())?,
    }
    Ok(out.finish())
}

fn cert_block(out: &mut Outcome, title: &str, c: &FactorCertificate) {
    out.lines.push(format!("{title}: {} [{}]", c.factor, if c.valid() { "valid" } else { "refuted" }));
    out.lines.extend(evidence_lines(&c.evidence));
    out.lines.extend(c.notes.iter().map(|e| format!("  (note) {}: {}", e.identity, e.certainty)));
}

fn factor_error(out: &mut Outcome, e: FactorError) -> anyhow::Result<()> {
    match e {
        FactorError::SelfCertification(c) => {
            let w = c.refutation().and_then(|e| e.certainty.witness()).cloned();
            cert_block(out, "converted factor", &c);
            out.fail("converted factor failed its certification".into(), w.as_ref());
            Ok(())
        }
        FactorError::Level(_) | FactorError::ZeroFactor => Err(anyhow!(e)),
        other => {
            out.fail(other.to_string(), None);
            Ok(())
        }
    }
}

pub fn factors(sc: &Scenario, emit_solvable: bool) -> anyhow::Result<Outcome> {
    let t = sc.tester();
    let mut out = Outcome::new("factors");
    let Some((s, d)) = structure(sc, &t, &mut out)? else {
        return Ok(out.finish());
    };
    let fs = sc.factors(false)?;
    let mus = sc.factors(true)?;
    if fs.is_none() && mus.is_none() {
        bail!("scenario lists no factors");
    }
    let mut report = Vec::new();
    for k in 1..=s.corank() {
        let mut entry = json!({ "level": k });
        if let Some(f) = fs.as_ref().map(|v| &v[k - 1]) {
            let c = check_symmetrizing_factor(&s, k, f, &t)?;
            cert_block(&mut out, &format!("f{k}"), &c);
            entry["symmetrizing"] = c.to_json();
            if !c.valid() {
                out.fail(format!("f{k} is not a symmetrizing factor"), first_witness(&c.evidence));
                continue;
            }
            match factor_to_integrating(&s, &d, k, f, &t) {
                Ok((mu, _)) => {
                    out.lines.push(format!("  f{k} -> mu{k} = {mu}"));
                    entry["converted_mu"] = json!(mu.to_string());
                    if let Some(given) = mus.as_ref().map(|v| &v[k - 1]) {
                        let same = t.is_zero(&(&mu - given))?;
                        out.lines.push(format!("  agrees with listed mu{k}: {same}"));
                        entry["agrees_with_listed"] = json!(same);
                    }
                    match integrating_to_factor(&s, &d, k, &mu, &t) {
                        Ok((back, _)) => {
                            let ok = &back == f;
                            out.lines.push(format!(
                                "  round trip f{k} -> mu{k} -> f{k}: {}",
                                if ok { "identical" } else { "DIFFERENT" }
                            ));
                            entry["round_trip"] = json!(ok);
                            if !ok {
                                out.fail(format!("round trip at level {k} changed the factor"), None);
                            }
                        }
                        Err(e) => factor_error(&mut out, e)?,
                    }
                }
                Err(e) => factor_error(&mut out, e)?,
            }
        }
        if let Some(mu) = mus.as_ref().map(|v| &v[k - 1]) {
            let c = check_relative_integrating_factor(&s, &d, k, mu, &t)?;
            cert_block(&mut out, &format!("mu{k}"), &c);
            entry["integrating"] = c.to_json();
            if !c.valid() {
                out.fail(format!("mu{k} is not a relative integrating factor"), first_witness(&c.evidence));
            }
        }
        report.push(entry);
    }
    out.set("levels", Value::Array(report));
    if emit_solvable {
        let Some(fs) = fs else {
            bail!("--emit-solvable needs symmetrizing_factors in the scenario");
        };
        match build_solvable_structure(&s, &fs, &t) {
            Ok(c) => {
                out.lines.push("solvable structure:".into());
                out.lines.extend(c.lines().into_iter().map(|l| format!("  {l}")));
                for (k, ls) in c.lambdas.iter().enumerate() {
                    let grades: Vec<String> = ls.iter().map(|g| g.to_string()).collect();
                    out.lines.push(format!("  lambda(Y{}) = 0: {}", k + 1, grades.join(", ")));
                }
                out.set("solvable", c.to_json());
                if !c.valid() {
                    out.fail("fields do not form a solvable structure".into(), None);
                }
            }
            Err(e) => triage(&mut out, e.into())?,
        }
    }
    Ok(out.finish())
}

pub fn verify_factor(sc: &Scenario, level: usize, kind: FactorKindArg, expr: &str) -> anyhow::Result<Outcome> {
    let t = sc.tester();
    let mut out = Outcome::new("verify factor");
    let e = sc.parse(expr)?;
    let Some((s, d)) = structure(sc, &t, &mut out)? else {
        return Ok(out.finish());
    };
    if level == 0 || level > s.corank() {
        bail!("level {level} is out of range 1..={}", s.corank());
    }
    let c = match kind {
        FactorKindArg::Symmetrizing => check_symmetrizing_factor(&s, level, &e, &t),
        FactorKindArg::RelativeIntegrating => check_relative_integrating_factor(&s, &d, level, &e, &t),
    };
    let c = c.map_err(|e| anyhow!(e))?;
    cert_block(&mut out, &format!("level {level}"), &c);
    out.set("certificate", c.to_json());
    if !c.valid() {
        out.fail("factor refuted".into(), first_witness(&c.evidence));
    }
    Ok(out.finish())
}

pub fn convert_factor(sc: &Scenario, dir: Direction, level: usize, expr: Option<&str>) -> anyhow::Result<Outcome> {
    let t = sc.tester();
    let mut out = Outcome::new("convert factor");
    let Some((s, d)) = structure(sc, &t, &mut out)? else {
        return Ok(out.finish());
    };
    if level == 0 || level > s.corank() {
        bail!("level {level} is out of range 1..={}", s.corank());
    }
    let integrating = matches!(dir, Direction::Mu2f);
    let input: Expr = match expr {
        Some(src) => sc.parse(src)?,
        None => sc
            .factors(integrating)?
            .map(|v| v[level - 1].clone())
            .ok_or_else(|| anyhow!("no --expr given and the scenario lists no factor for level {level}"))?,
    };
    let there = match dir {
        Direction::F2mu => factor_to_integrating(&s, &d, level, &input, &t),
        Direction::Mu2f => integrating_to_factor(&s, &d, level, &input, &t),
    };
    let (result, cert) = match there {
        Ok(r) => r,
        Err(e) => {
            factor_error(&mut out, e)?;
            return Ok(out.finish());
        }
    };
    let (from, to) = if integrating { ("mu", "f") } else { ("f", "mu") };
    out.lines.push(format!("{from}{level} = {input}"));
    cert_block(&mut out, &format!("{to}{level}"), &cert);
    let back = match dir {
        Direction::F2mu => integrating_to_factor(&s, &d, level, &result, &t),
        Direction::Mu2f => factor_to_integrating(&s, &d, level, &result, &t),
    };
    match back {
        Ok((b, _)) => {
            let ok = b == input;
            out.lines.push(format!(
                "round trip {from} -> {to} -> {from}: {}",
                if ok { "identical (canonical equality)" } else { "DIFFERENT" }
            ));
            out.set("round_trip", json!(ok));
            if !ok {
                out.fail("round trip changed the factor".into(), None);
            }
        }
        Err(e) => factor_error(&mut out, e)?,
    }
    out.set("input", json!(input.to_string()));
    out.set("result", json!(result.to_string()));
    out.set("certificate", cert.to_json());
    Ok(out.finish())
}
