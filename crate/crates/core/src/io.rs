//! JSON instance documents.
//!
//! Serialization is canonical: keys follow declaration order, numbers are
//! rounded to 12 significant digits and printed in shortest form, and
//! containers that fit on one line are kept on one line. Parsing rejects
//! unknown keys and reports syntax and schema problems with line and column.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::bmgop::BmgopInstance;
use crate::domain::{
    ActionId, ActionPoint, ActionRule, CostModel, CostRule, Domain, EffectKind, IntegrityConstraint,
    ModelError, RuleEffect,
};
use crate::formula::{AtomTerm, Formula, Term};
use crate::gbgop::GbgopInstance;
use crate::map::{GridMap, Metric, Point};
use crate::num::round_sig;
use crate::state::{GroundAtom, PredicateId, State};

pub const SCHEMA_VERSION: u32 = 1;

const LINE_WIDTH: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Gbgop(GbgopInstance),
    Bmgop(BmgopInstance),
}

impl Instance {
    pub fn domain(&self) -> &Domain {
        match self {
            Instance::Gbgop(i) => &i.domain,
            Instance::Bmgop(i) => &i.domain,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Instance::Gbgop(_) => "gbgop",
            Instance::Bmgop(_) => "bmgop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },
    #[error("unsupported document version {found} (expected {SCHEMA_VERSION})")]
    Version { found: u32 },
    #[error("{context}: {message}")]
    Formula { context: String, message: String },
    #[error("action `{action}`: {message}")]
    ActionForm { action: String, message: String },
    #[error("problem: {0}")]
    Problem(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Syntax { .. } => "E_SYNTAX",
            IoError::Schema { .. } => "E_SCHEMA",
            IoError::Version { .. } => "E_VERSION",
            IoError::Formula { .. } => "E_FORMULA",
            IoError::ActionForm { .. } => "E_ACTION_FORM",
            IoError::Problem(_) => "E_PROBLEM",
            IoError::Model(e) => e.code(),
        }
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> IoError {
    let (line, column, message) = (e.line(), e.column(), e.to_string());
    // serde_json appends the position to its message; keep only ours
    let message = match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message,
    };
    match e.classify() {
        serde_json::error::Category::Data => IoError::Schema { line, column, message },
        _ => IoError::Syntax { line, column, message },
    }
}

type XY = (u32, u32);
type AtomDoc = (String, XY);
type PairDoc = (String, XY);

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    version: u32,
    map: MapDoc,
    predicates: Vec<String>,
    #[serde(default)]
    state: Vec<AtomDoc>,
    #[serde(default)]
    actions: Vec<ActionDoc>,
    #[serde(default)]
    cost: CostDoc,
    #[serde(default)]
    benefit: BenefitDoc,
    #[serde(default)]
    ics: Vec<IcDoc>,
    problem: ProblemDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MapDoc {
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "N")]
    n: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    effect: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_guard: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_guard: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_distance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    explicit: Option<Vec<ExplicitDoc>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitDoc {
    point: XY,
    atoms: Vec<AtomDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostDoc {
    default: f64,
    #[serde(default)]
    rules: Vec<CostRuleDoc>,
    #[serde(default)]
    overrides: Vec<CostOverrideDoc>,
}

impl Default for CostDoc {
    fn default() -> Self {
        CostDoc {
            default: CostModel::default().default_cost,
            rules: Vec::new(),
            overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostRuleDoc {
    when: Value,
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostOverrideDoc {
    action: String,
    point: XY,
    cost: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenefitDoc {
    #[serde(default)]
    per_predicate: Map<String, Value>,
    #[serde(default)]
    overrides: Vec<BenefitOverrideDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenefitOverrideDoc {
    atom: AtomDoc,
    benefit: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IcDoc {
    pairs: Vec<PairDoc>,
    #[serde(default = "true_value")]
    condition: Value,
}

fn true_value() -> Value {
    Value::String("true".into())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    #[serde(rename = "type")]
    kind: String,
    budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_in: Option<Vec<AtomDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_out: Option<Vec<AtomDoc>>,
}

/// Name lookups while converting a document.
struct Names {
    map: GridMap,
    predicates: HashMap<String, usize>,
    actions: HashMap<String, usize>,
}

fn unique(kind: &'static str, names: &[String]) -> Result<HashMap<String, usize>, ModelError> {
    let mut out = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if out.insert(n.clone(), i).is_some() {
            return Err(ModelError::DuplicateName { kind, name: n.clone() });
        }
    }
    Ok(out)
}

impl Names {
    fn predicate(&self, ctx: &str, name: &str) -> Result<PredicateId, ModelError> {
        self.predicates.get(name).map(|&i| PredicateId(i)).ok_or_else(|| ModelError::Unknown {
            context: ctx.to_string(),
            kind: "predicate",
            name: name.to_string(),
        })
    }

    fn action(&self, ctx: &str, name: &str) -> Result<ActionId, ModelError> {
        self.actions.get(name).map(|&i| ActionId(i)).ok_or_else(|| ModelError::Unknown {
            context: ctx.to_string(),
            kind: "action",
            name: name.to_string(),
        })
    }

    fn point(&self, ctx: &str, xy: XY) -> Result<Point, ModelError> {
        let p = Point::new(xy.0, xy.1);
        if self.map.contains(p) {
            Ok(p)
        } else {
            Err(ModelError::OutOfBounds {
                context: ctx.to_string(),
                point: p,
            })
        }
    }

    fn atom(&self, ctx: &str, a: &AtomDoc) -> Result<GroundAtom, ModelError> {
        Ok(GroundAtom::new(self.predicate(ctx, &a.0)?, self.point(ctx, a.1)?))
    }

    fn atoms(&self, ctx: &str, list: &[AtomDoc]) -> Result<Vec<GroundAtom>, ModelError> {
        list.iter().map(|a| self.atom(ctx, a)).collect()
    }

    fn pair(&self, ctx: &str, p: &PairDoc) -> Result<ActionPoint, ModelError> {
        Ok(ActionPoint::new(self.action(ctx, &p.0)?, self.point(ctx, p.1)?))
    }

    fn formula(&self, ctx: &str, v: &Value) -> Result<Formula, IoError> {
        let bad = |message: String| IoError::Formula {
            context: ctx.to_string(),
            message,
        };
        match v {
            Value::String(s) if s == "true" => Ok(Formula::True),
            Value::Object(m) if m.len() == 1 => {
                let (key, body) = m.iter().next().unwrap();
                let list = |body: &Value| -> Result<Vec<Formula>, IoError> {
                    body.as_array()
                        .ok_or_else(|| bad(format!("`{key}` expects an array")))?
                        .iter()
                        .map(|f| self.formula(ctx, f))
                        .collect()
                };
                match key.as_str() {
                    "and" => Ok(Formula::And(list(body)?)),
                    "or" => Ok(Formula::Or(list(body)?)),
                    "not" => Ok(Formula::not(self.formula(ctx, body)?)),
                    "atom" => self.formula_atom(ctx, body).map_err(|e| match e {
                        IoError::Model(m) => IoError::Model(m),
                        _ => bad("`atom` expects [predicate, [x, y] | \"p\" | \"p'\"]".into()),
                    }),
                    other => Err(bad(format!("unknown connective `{other}`"))),
                }
            }
            _ => Err(bad(format!(
                "expected \"true\" or an object with one of and/or/not/atom, found {v}"
            ))),
        }
    }

    fn formula_atom(&self, ctx: &str, body: &Value) -> Result<Formula, IoError> {
        let shape = || IoError::Formula {
            context: ctx.to_string(),
            message: String::new(),
        };
        let parts = body.as_array().filter(|a| a.len() == 2).ok_or_else(shape)?;
        let pred = self.predicate(ctx, parts[0].as_str().ok_or_else(shape)?)?;
        let term = match &parts[1] {
            Value::String(s) if s == "p" => Term::Placement,
            Value::String(s) if s == "p'" => Term::Target,
            v => {
                let xy: XY = serde_json::from_value(v.clone()).map_err(|_| shape())?;
                Term::Point(self.point(ctx, xy)?)
            }
        };
        Ok(Formula::Atom(AtomTerm { predicate: pred, term }))
    }
}

fn number(ctx: &str, v: &Value) -> Result<f64, IoError> {
    v.as_f64().ok_or_else(|| IoError::Formula {
        context: ctx.to_string(),
        message: format!("expected a number, found {v}"),
    })
}

fn domain_from_doc(doc: &Doc) -> Result<Domain, IoError> {
    let map = GridMap::new(doc.map.m, doc.map.n);
    let action_names: Vec<String> = doc.actions.iter().map(|a| a.name.clone()).collect();
    let names = Names {
        map,
        predicates: unique("predicate", &doc.predicates)?,
        actions: unique("action", &action_names)?,
    };
    let mut d = Domain::new(map, doc.predicates.clone());
    d.initial = State::from_atoms(d.universe(), &names.atoms("state", &doc.state)?);

    for a in &doc.actions {
        let form_error = |message: &str| IoError::ActionForm {
            action: a.name.clone(),
            message: message.to_string(),
        };
        let ctx = format!("action `{}`", a.name);
        let rule_fields =
            a.effect.is_some() || a.source_guard.is_some() || a.target_guard.is_some() || a.max_distance.is_some() || a.metric.is_some();
        let kind = match (&a.explicit, rule_fields) {
            (Some(_), true) => return Err(form_error("has both an explicit table and rule fields")),
            (Some(table), false) => {
                let mut t = BTreeMap::new();
                for entry in table {
                    let p = names.point(&ctx, entry.point)?;
                    t.entry(p).or_insert_with(Vec::new).extend(names.atoms(&ctx, &entry.atoms)?);
                }
                EffectKind::Explicit(t)
            }
            (None, _) => {
                let effect = a.effect.as_deref().ok_or_else(|| form_error("needs `effect` or `explicit`"))?;
                let guard = |g: &Option<Value>, what: &str| match g {
                    Some(v) => names.formula(&format!("{ctx} {what}"), v),
                    None => Ok(Formula::True),
                };
                EffectKind::Rule(RuleEffect {
                    effect: names.predicate(&ctx, effect)?,
                    source_guard: guard(&a.source_guard, "source_guard")?,
                    target_guard: guard(&a.target_guard, "target_guard")?,
                    max_distance: a.max_distance,
                    metric: a.metric.unwrap_or_default(),
                })
            }
        };
        d.actions.push(ActionRule {
            name: a.name.clone(),
            kind,
        });
    }

    d.cost.default_cost = doc.cost.default;
    for (i, r) in doc.cost.rules.iter().enumerate() {
        d.cost.rules.push(CostRule {
            when: names.formula(&format!("cost rule #{i}"), &r.when)?,
            cost: r.cost,
        });
    }
    for o in &doc.cost.overrides {
        let pair = names.pair("cost override", &(o.action.clone(), o.point))?;
        d.cost.overrides.insert(pair, o.cost);
    }
    for (pred, v) in &doc.benefit.per_predicate {
        let id = names.predicate("benefit", pred)?;
        d.benefit.per_predicate.insert(id, number(&format!("benefit of `{pred}`"), v)?);
    }
    for o in &doc.benefit.overrides {
        d.benefit.overrides.insert(names.atom("benefit override", &o.atom)?, o.benefit);
    }
    for (i, ic) in doc.ics.iter().enumerate() {
        let ctx = format!("integrity constraint #{i}");
        let pairs = ic.pairs.iter().map(|p| names.pair(&ctx, p)).collect::<Result<Vec<_>, _>>()?;
        d.ics.push(IntegrityConstraint::new(pairs, names.formula(&ctx, &ic.condition)?));
    }
    d.validate()?;
    Ok(d)
}

fn instance_from_doc(doc: Doc) -> Result<Instance, IoError> {
    if doc.version != SCHEMA_VERSION {
        return Err(IoError::Version { found: doc.version });
    }
    let d = domain_from_doc(&doc)?;
    let names = Names {
        map: d.map,
        predicates: unique("predicate", &doc.predicates)?,
        actions: HashMap::new(),
    };
    let p = &doc.problem;
    match p.kind.as_str() {
        "gbgop" => {
            if p.k.is_some() {
                return Err(IoError::Problem("`k` only applies to bmgop".into()));
            }
            let theta_in = names.atoms("theta_in", p.theta_in.as_deref().unwrap_or_default())?;
            let theta_out = names.atoms("theta_out", p.theta_out.as_deref().unwrap_or_default())?;
            Ok(Instance::Gbgop(GbgopInstance::new(d, p.budget, theta_in, theta_out)?))
        }
        "bmgop" => {
            if p.theta_in.is_some() || p.theta_out.is_some() {
                return Err(IoError::Problem("goal sets only apply to gbgop".into()));
            }
            let k = p.k.ok_or_else(|| IoError::Problem("bmgop needs `k`".into()))?;
            Ok(Instance::Bmgop(BmgopInstance::new(d, k, p.budget)?))
        }
        other => Err(IoError::Problem(format!("unknown type `{other}` (expected gbgop or bmgop)"))),
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let doc: Doc = serde_json::from_str(text).map_err(json_error)?;
    instance_from_doc(doc)
}

fn xy(p: Point) -> XY {
    (p.x, p.y)
}

fn formula_value(d: &Domain, f: &Formula) -> Value {
    match f {
        Formula::True => true_value(),
        Formula::Atom(a) => {
            let term = match a.term {
                Term::Point(p) => serde_json::json!([p.x, p.y]),
                Term::Placement => Value::from("p"),
                Term::Target => Value::from("p'"),
            };
            serde_json::json!({ "atom": [d.predicates[a.predicate.0], term] })
        }
        Formula::And(fs) => serde_json::json!({ "and": fs.iter().map(|f| formula_value(d, f)).collect::<Vec<_>>() }),
        Formula::Or(fs) => serde_json::json!({ "or": fs.iter().map(|f| formula_value(d, f)).collect::<Vec<_>>() }),
        Formula::Not(f) => serde_json::json!({ "not": formula_value(d, f) }),
    }
}

fn atom_doc(d: &Domain, a: &GroundAtom) -> AtomDoc {
    (d.predicates[a.predicate.0].clone(), xy(a.point))
}

fn doc_from_domain(d: &Domain, problem: ProblemDoc) -> Doc {
    let actions = d
        .actions
        .iter()
        .map(|a| match &a.kind {
            EffectKind::Rule(r) => ActionDoc {
                name: a.name.clone(),
                effect: Some(d.predicates[r.effect.0].clone()),
                source_guard: Some(formula_value(d, &r.source_guard)),
                target_guard: Some(formula_value(d, &r.target_guard)),
                max_distance: r.max_distance,
                metric: Some(r.metric),
                explicit: None,
            },
            EffectKind::Explicit(t) => ActionDoc {
                name: a.name.clone(),
                effect: None,
                source_guard: None,
                target_guard: None,
                max_distance: None,
                metric: None,
                explicit: Some(
                    t.iter()
                        .map(|(p, atoms)| ExplicitDoc {
                            point: xy(*p),
                            atoms: atoms.iter().map(|a| atom_doc(d, a)).collect(),
                        })
                        .collect(),
                ),
            },
        })
        .collect();
    let pair_doc = |p: &ActionPoint| (d.actions[p.action.0].name.clone(), xy(p.point));
    Doc {
        version: SCHEMA_VERSION,
        map: MapDoc {
            m: d.map.width_bound(),
            n: d.map.height_bound(),
        },
        predicates: d.predicates.clone(),
        state: d.initial.atoms().map(|a| atom_doc(d, &a)).collect(),
        actions,
        cost: CostDoc {
            default: d.cost.default_cost,
            rules: d
                .cost
                .rules
                .iter()
                .map(|r| CostRuleDoc {
                    when: formula_value(d, &r.when),
                    cost: r.cost,
                })
                .collect(),
            overrides: d
                .cost
                .overrides
                .iter()
                .map(|(p, &cost)| CostOverrideDoc {
                    action: d.actions[p.action.0].name.clone(),
                    point: xy(p.point),
                    cost,
                })
                .collect(),
        },
        benefit: BenefitDoc {
            per_predicate: d
                .benefit
                .per_predicate
                .iter()
                .map(|(p, &b)| (d.predicates[p.0].clone(), Value::from(b)))
                .collect(),
            overrides: d
                .benefit
                .overrides
                .iter()
                .map(|(a, &benefit)| BenefitOverrideDoc {
                    atom: atom_doc(d, a),
                    benefit,
                })
                .collect(),
        },
        ics: d
            .ics
            .iter()
            .map(|ic| IcDoc {
                pairs: ic.pairs().iter().map(pair_doc).collect(),
                condition: formula_value(d, &ic.condition),
            })
            .collect(),
        problem,
    }
}

pub fn serialize_instance(inst: &Instance) -> String {
    let doc = match inst {
        Instance::Gbgop(g) => doc_from_domain(
            &g.domain,
            ProblemDoc {
                kind: "gbgop".into(),
                budget: g.budget,
                k: None,
                theta_in: Some(g.theta_in.iter().map(|a| atom_doc(&g.domain, a)).collect()),
                theta_out: Some(g.theta_out.iter().map(|a| atom_doc(&g.domain, a)).collect()),
            },
        ),
        Instance::Bmgop(b) => doc_from_domain(
            &b.domain,
            ProblemDoc {
                kind: "bmgop".into(),
                budget: b.budget,
                k: Some(b.k),
                theta_in: None,
                theta_out: None,
            },
        ),
    };
    to_canonical_json(&doc)
}

/// Rounds floats to 12 significant digits; integral values become integers.
pub fn canonical_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap());
            *v = if r.fract() == 0.0 && r.abs() < 9.0e15 {
                Value::from(r as i64)
            } else {
                Value::from(r)
            };
        }
        Value::Array(a) => a.iter_mut().for_each(canonical_numbers),
        Value::Object(m) => m.values_mut().for_each(canonical_numbers),
        _ => {}
    }
}

/// Canonical text for any serializable value, newline-terminated.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("documents serialize to JSON");
    canonical_numbers(&mut v);
    let mut out = String::new();
    write_value(&mut out, &v, 0, 0);
    out.push('\n');
    out
}

/// Writes `v` at nesting `depth`, starting at column `col`.
fn write_value(out: &mut String, v: &Value, depth: usize, col: usize) {
    let compact = serde_json::to_string(v).unwrap();
    let is_container = matches!(v, Value::Array(a) if !a.is_empty()) || matches!(v, Value::Object(m) if !m.is_empty());
    if !is_container || col + compact.len() <= LINE_WIDTH {
        out.push_str(&compact);
        return;
    }
    let pad = "  ".repeat(depth + 1);
    let (open, close) = if v.is_array() { ('[', ']') } else { ('{', '}') };
    out.push(open);
    let mut first = true;
    let mut item = |out: &mut String, key: Option<&str>, child: &Value| {
        out.push_str(if first { "\n" } else { ",\n" });
        first = false;
        out.push_str(&pad);
        let mut c = pad.len();
        if let Some(k) = key {
            let key = serde_json::to_string(k).unwrap();
            out.push_str(&key);
            out.push_str(": ");
            c += key.len() + 2;
        }
        write_value(out, child, depth + 1, c);
    };
    match v {
        Value::Array(items) => items.iter().for_each(|x| item(out, None, x)),
        Value::Object(m) => m.iter().for_each(|(k, x)| item(out, Some(k), x)),
        _ => unreachable!(),
    }
    out.push('\n');
    out.push_str(&"  ".repeat(depth));
    out.push(close);
}
