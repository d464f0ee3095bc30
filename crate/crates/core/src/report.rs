//! Experiment configuration, the staged runner, and report emission.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize};

use crate::code::{
    code_params, dual_low_weights, macwilliams_dual, CodeParams, SubfieldCode, WeightDistribution,
    DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::field::{Elem, FieldCtx, DEFAULT_CEILING};
use crate::pn::{build_pn, Family, PnFunction, PnParams, Term};
use crate::quadform::{det_relation, epsilon_of, DetRelation};
use crate::theory::{
    nu_predicted, nu_profile, pless_verify, predict_cm, predict_pn_do, predict_punctured,
    rouayheb_check, sphere_packing_check, BoundVerdict, Prediction, PuncturedKind,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    VerifyPn,
    Enumerate,
    Predict,
    Dual,
    Pless,
    Bounds,
    Nu,
    DetRelation,
    Puncture,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::VerifyPn,
        Check::Enumerate,
        Check::Predict,
        Check::Dual,
        Check::Pless,
        Check::Bounds,
        Check::Nu,
        Check::DetRelation,
        Check::Puncture,
    ];

    /// Whether the check makes sense for `family`.
    pub fn applies_to(self, family: Family) -> bool {
        match self {
            Check::Nu => family == Family::F2Cm,
            Check::DetRelation => !matches!(family, Family::F2Cm | Family::Raw),
            Check::Predict | Check::Puncture | Check::VerifyPn => family != Family::Raw,
            _ => true,
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
            .map_err(|_| format!("unknown check `{s}`"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).unwrap();
        f.write_str(v.as_str().unwrap())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    #[default]
    Text,
    Json,
    Csv,
}

impl FromStr for Emit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Emit::Text),
            "json" => Ok(Emit::Json),
            "csv" => Ok(Emit::Csv),
            other => Err(Error::InvalidParameter(format!("unknown output format `{other}`"))),
        }
    }
}

/// A field element given either by its integer encoding or as
/// `"primitive"` / `"primitive^e"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemSpec {
    Int(Elem),
    Named(String),
}

impl ElemSpec {
    pub fn resolve(&self, ctx: &FieldCtx) -> Result<Elem> {
        let x = match self {
            ElemSpec::Int(v) => *v,
            ElemSpec::Named(s) => {
                let s = s.trim();
                if let Ok(v) = s.parse::<Elem>() {
                    v
                } else if s == "primitive" {
                    ctx.primitive_element()
                } else if let Some(e) = s.strip_prefix("primitive^") {
                    let e: u64 = e
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad exponent in `{s}`")))?;
                    ctx.pow(ctx.primitive_element(), e)
                } else {
                    return Err(Error::InvalidParameter(format!("cannot read `{s}` as a field element")));
                }
            }
        };
        if !ctx.is_valid(x) {
            return Err(Error::InvalidParameter(format!("{x} is not an element of F_{}", ctx.order())));
        }
        Ok(x)
    }
}

impl FromStr for ElemSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<Elem>() {
            Ok(v) => ElemSpec::Int(v),
            Err(_) => ElemSpec::Named(s.to_string()),
        })
    }
}

fn all_checks() -> Vec<Check> {
    Check::ALL.to_vec()
}

fn de_checks<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Check>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Spec {
        Word(String),
        List(Vec<Check>),
    }
    match Spec::deserialize(d)? {
        Spec::Word(w) if w == "all" => Ok(all_checks()),
        Spec::Word(w) => w
            .parse::<Check>()
            .map(|c| vec![c])
            .map_err(serde::de::Error::custom),
        Spec::List(v) => Ok(v),
    }
}

/// One experiment, read from a flat TOML document.
///
/// ```toml
/// p = 5
/// m = 2
/// family = "f1"
/// k = 0
/// scale = "primitive"
/// checks = ["enumerate", "predict", "dual"]   # or "all"
/// emit = "json"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u32,
    pub m: u32,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ElemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ElemSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<ElemSpec>,
    /// `[coefficient, exponent]` pairs for the `raw` family.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<(ElemSpec, u64)>,
    #[serde(default = "all_checks", deserialize_with = "de_checks")]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub emit: Emit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(p: u32, m: u32, family: Family) -> Self {
        let mut cfg = ExperimentConfig {
            p,
            m,
            family,
            k: None,
            s: None,
            t: None,
            r: None,
            beta: None,
            scale: None,
            coeffs: Vec::new(),
            terms: Vec::new(),
            checks: all_checks(),
            emit: Emit::Text,
            budget: None,
            ceiling: None,
        };
        cfg.normalize_checks();
        cfg
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        cfg.normalize_checks();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_checks(mut self, checks: impl IntoIterator<Item = Check>) -> Self {
        self.checks = checks.into_iter().collect();
        self.normalize_checks();
        self
    }

    /// Apply one `key=value` override.
    pub fn set_param(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{kv}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let num = |v: &str| -> Result<u64> {
            v.parse().map_err(|_| Error::InvalidParameter(format!("`{key}` needs an integer, got `{v}`")))
        };
        let small = |v: &str| -> Result<u32> {
            u32::try_from(num(v)?).map_err(|_| Error::InvalidParameter(format!("`{key}` is too large")))
        };
        let elem = |v: &str| -> ElemSpec { v.parse().unwrap() };
        match key {
            "p" => self.p = small(value)?,
            "m" => self.m = small(value)?,
            "family" => self.family = value.parse().map_err(Error::InvalidParameter)?,
            "k" => self.k = Some(small(value)?),
            "s" => self.s = Some(small(value)?),
            "t" => self.t = Some(small(value)?),
            "r" => self.r = Some(num(value)?),
            "beta" => self.beta = Some(elem(value)),
            "scale" => self.scale = Some(elem(value)),
            "coeffs" => self.coeffs = value.split(',').map(|v| elem(v.trim())).collect(),
            "budget" => self.budget = Some(num(value)?),
            "ceiling" => self.ceiling = Some(num(value)?),
            other => return Err(Error::InvalidParameter(format!("unknown parameter `{other}`"))),
        }
        Ok(())
    }

    /// Sort, deduplicate, and drop checks that do not apply to the family
    /// when the full set was requested.
    fn normalize_checks(&mut self) {
        let set: BTreeSet<Check> = self.checks.iter().copied().collect();
        let everything = set.len() == Check::ALL.len();
        self.checks = set
            .into_iter()
            .filter(|c| !everything || c.applies_to(self.family))
            .collect();
    }

    pub fn has(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }

    pub fn budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    fn pn_params(&self, ctx: &FieldCtx) -> Result<PnParams> {
        let opt = |v: &Option<ElemSpec>| v.as_ref().map(|e| e.resolve(ctx)).transpose();
        Ok(PnParams {
            k: self.k,
            s: self.s,
            t: self.t,
            beta: opt(&self.beta)?,
            r: self.r,
            coeffs: self.coeffs.iter().map(|c| c.resolve(ctx)).collect::<Result<_>>()?,
            scale: opt(&self.scale)?,
        })
    }

    /// Validate the configuration and build the field and the function.
    pub fn build(&self) -> Result<(Arc<FieldCtx>, PnFunction)> {
        for c in &self.checks {
            if !c.applies_to(self.family) {
                return Err(Error::InvalidParameter(format!(
                    "check `{c}` does not apply to family {}",
                    self.family
                )));
            }
        }
        let ctx = Arc::new(FieldCtx::new(self.p, self.m, self.ceiling.unwrap_or(DEFAULT_CEILING))?);
        let f = if self.family == Family::Raw {
            if self.terms.is_empty() {
                return Err(Error::InvalidParameter("raw family requires `terms`".into()));
            }
            let terms = self
                .terms
                .iter()
                .map(|(c, e)| Ok(Term { coeff: c.resolve(&ctx)?, exp: *e }))
                .collect::<Result<Vec<_>>>()?;
            PnFunction::raw(&ctx, terms)
        } else {
            build_pn(&ctx, self.family, self.pn_params(&ctx)?)?
        };
        Ok((ctx, f))
    }
}

/// Pipeline stages, in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Field,
    VerifyPn,
    Epsilon,
    Enumerate,
    Predict,
    Dual,
    Pless,
    Bounds,
    Nu,
    DetRelation,
    Puncture,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).unwrap();
        f.write_str(v.as_str().unwrap())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stage {stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    pub source: Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Exact,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchVerdict {
    pub status: MatchStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_difference: Option<usize>,
}

impl MatchVerdict {
    fn compare(enumerated: &WeightDistribution, predicted: &WeightDistribution) -> Self {
        let first_difference = if enumerated.n != predicted.n {
            Some(0)
        } else {
            enumerated.first_difference(predicted)
        };
        MatchVerdict {
            status: if first_difference.is_none() { MatchStatus::Exact } else { MatchStatus::Mismatch },
            first_difference,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.status == MatchStatus::Exact
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnumeratedCode {
    pub params: CodeParams,
    pub claimed_dimension: u32,
    pub distribution: WeightDistribution,
}

fn ser_low<S: serde::Serializer>(v: &[BigUint; 4], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|c| c.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualReport {
    /// `None` when the dual is the zero code.
    pub params: Option<CodeParams>,
    /// `A⊥_1 .. A⊥_4`.
    #[serde(serialize_with = "ser_low")]
    pub low_weights: [BigUint; 4],
    /// Transforming the dual back reproduces the primal.
    pub involution_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim: Option<CodeParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub claim_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a4_holds: Option<bool>,
    #[serde(skip)]
    pub distribution: WeightDistribution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlessReport {
    pub residuals: Vec<String>,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NuReport {
    pub checked: u64,
    pub mismatches: u64,
    pub holds: bool,
}

/// The results attached to one code (full or punctured).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CodeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated: Option<EnumeratedCode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Prediction>,
    #[serde(rename = "match", skip_serializing_if = "Option::is_none")]
    pub verdict: Option<MatchVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pless: Option<PlessReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bounds: Vec<BoundVerdict>,
}

impl CodeSection {
    fn is_empty(&self) -> bool {
        *self == CodeSection::default()
    }

    fn primal(&self) -> Option<&WeightDistribution> {
        self.enumerated
            .as_ref()
            .map(|e| &e.distribution)
            .or(self.predicted.as_ref().map(|p| &p.distribution))
    }

    fn failures(&self, prefix: &str, out: &mut Vec<String>) {
        if let Some(v) = &self.verdict {
            if !v.is_exact() {
                out.push(format!("{prefix}match"));
            }
        }
        if let Some(d) = &self.dual {
            if !d.involution_holds {
                out.push(format!("{prefix}dual_involution"));
            }
            if d.claim_holds == Some(false) {
                out.push(format!("{prefix}dual_claim"));
            }
            if d.a4_holds == Some(false) {
                out.push(format!("{prefix}dual_a4"));
            }
        }
        if let Some(p) = &self.pless {
            if !p.holds {
                out.push(format!("{prefix}pless"));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: String,
    pub config: ExperimentConfig,
    pub modulus: Vec<u32>,
    pub function: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pn_verified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<i8>,
    #[serde(skip_serializing_if = "CodeSection::is_empty")]
    pub code: CodeSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub punctured: Option<CodeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub det_relation: Option<DetRelation>,
    /// Names of checks that failed.
    pub failures: Vec<String>,
    /// Set when a stage ran out of budget; later stages were skipped.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incomplete: Option<String>,
    /// Wall-clock seconds; never serialized so JSON stays reproducible.
    #[serde(skip)]
    pub timing: Option<f64>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.incomplete.is_none()
    }

    /// 0 pass, 1 mismatch, 3 budget exceeded.
    pub fn exit_code(&self) -> i32 {
        if !self.failures.is_empty() {
            1
        } else if self.incomplete.is_some() {
            3
        } else {
            0
        }
    }
}

impl StageError {
    /// 1 for consistency failures, 2 for bad input, 3 for capacity.
    pub fn exit_code(&self) -> i32 {
        match self.source {
            Error::InternalConsistency(_) => 1,
            Error::CapacityExceeded(_) => 3,
            Error::InvalidParameter(_) | Error::InvalidInput(_) => 2,
        }
    }
}

fn at(stage: Stage) -> impl FnOnce(Error) -> StageError {
    move |source| StageError { stage, source }
}

fn dual_section(
    primal: &WeightDistribution,
    claim: Option<&Prediction>,
) -> std::result::Result<DualReport, StageError> {
    let dual = macwilliams_dual(primal).map_err(at(Stage::Dual))?;
    let back = macwilliams_dual(&dual).map_err(at(Stage::Dual))?;
    let params = code_params(&dual).ok();
    let low_weights = dual_low_weights(&dual);
    let claimed = claim.and_then(|p| p.dual_claim);
    Ok(DualReport {
        params,
        involution_holds: back == *primal,
        claim: claimed,
        claim_holds: claimed.map(|c| Some(c) == params),
        a4_holds: claim.and_then(|p| p.dual_a4.as_ref()).map(|a4| *a4 == low_weights[3]),
        low_weights,
        distribution: dual,
    })
}

fn bounds_for(params: &CodeParams, q: u32) -> std::result::Result<Vec<BoundVerdict>, StageError> {
    let sp = sphere_packing_check(params.n, params.k, params.d, q).map_err(at(Stage::Bounds))?;
    let ro = rouayheb_check(params.n, params.k, params.d, q).map_err(at(Stage::Bounds))?;
    Ok(vec![sp, ro])
}

/// Run dual, Pless and bounds on a section whose primal is already set.
fn finish_section(
    cfg: &ExperimentConfig,
    sec: &mut CodeSection,
    q: u32,
) -> std::result::Result<(), StageError> {
    let need_dual = cfg.has(Check::Dual) || cfg.has(Check::Pless) || cfg.has(Check::Bounds);
    let Some(primal) = sec.primal().cloned() else { return Ok(()) };
    if !need_dual {
        return Ok(());
    }
    let dual = dual_section(&primal, sec.predicted.as_ref())?;
    if cfg.has(Check::Pless) {
        let check = pless_verify(&primal, &dual.low_weights);
        sec.pless = Some(PlessReport {
            residuals: check.residuals.iter().map(|r| r.to_string()).collect(),
            holds: check.holds(),
        });
    }
    if cfg.has(Check::Bounds) {
        if let Some(params) = &dual.params {
            if params.d <= params.n && params.k > 0 {
                sec.bounds = bounds_for(params, q)?;
            }
        }
    }
    sec.dual = Some(dual);
    Ok(())
}

/// Run every requested check in dependency order.
pub fn run_experiment(cfg: &ExperimentConfig) -> std::result::Result<Report, StageError> {
    let (ctx, f) = cfg.build().map_err(|e| {
        let stage = match e {
            Error::CapacityExceeded(_) => Stage::Field,
            _ => Stage::Config,
        };
        StageError { stage, source: e }
    })?;
    let (p, m) = (ctx.p(), ctx.m());
    let mut report = Report {
        version: VERSION.to_string(),
        config: cfg.clone(),
        modulus: ctx.modulus().to_vec(),
        function: f.describe(),
        pn_verified: None,
        epsilon: None,
        code: CodeSection::default(),
        punctured: None,
        nu: None,
        det_relation: None,
        failures: Vec::new(),
        incomplete: None,
        timing: None,
    };

    if cfg.has(Check::VerifyPn) {
        report.pn_verified = Some(f.verify_pn());
    }

    let is_do = f.family() != Family::F2Cm && f.is_do();
    if cfg.has(Check::Predict) && is_do && m % 2 == 0 {
        report.epsilon = Some(epsilon_of(&f).map_err(at(Stage::Epsilon))?);
    }

    let needs_primal = cfg.has(Check::Dual) || cfg.has(Check::Pless) || cfg.has(Check::Bounds);
    let enumerate = cfg.has(Check::Enumerate)
        || cfg.has(Check::Puncture)
        || (needs_primal && !cfg.has(Check::Predict));
    let mut punctured_enum = None;
    if enumerate {
        let code = SubfieldCode::new(f.clone());
        match code.enumerate(cfg.budget()) {
            Ok(e) => {
                let params = code_params(&e.full).map_err(at(Stage::Enumerate))?;
                report.code.enumerated = Some(EnumeratedCode {
                    params,
                    claimed_dimension: e.claimed_dimension,
                    distribution: e.full,
                });
                punctured_enum = Some(e.punctured);
            }
            Err(Error::CapacityExceeded(msg)) => {
                report.incomplete = Some(format!("{}: {msg}", Stage::Enumerate));
            }
            Err(e) => return Err(at(Stage::Enumerate)(e)),
        }
    }

    if report.incomplete.is_none() {
        if cfg.has(Check::Predict) {
            let pred = match f.family() {
                Family::F2Cm => predict_cm(m),
                _ if is_do => predict_pn_do(p, m, report.epsilon),
                other => Err(Error::InvalidParameter(format!("no closed form for family {other}"))),
            }
            .map_err(at(Stage::Predict))?;
            if let Some(e) = &report.code.enumerated {
                report.code.verdict = Some(MatchVerdict::compare(&e.distribution, &pred.distribution));
            }
            report.code.predicted = Some(pred);
        }

        finish_section(cfg, &mut report.code, p)?;

        if cfg.has(Check::Nu) {
            let k = cfg.k.unwrap_or_default();
            let profile = nu_profile(&ctx, k).map_err(at(Stage::Nu))?;
            let mismatches =
                ctx.elements().filter(|&u| profile[u as usize] != nu_predicted(&ctx, u)).count() as u64;
            report.nu = Some(NuReport { checked: ctx.order() as u64, mismatches, holds: mismatches == 0 });
        }

        if cfg.has(Check::DetRelation) {
            report.det_relation = Some(det_relation(&f).map_err(at(Stage::DetRelation))?);
        }

        if cfg.has(Check::Puncture) {
            let wd = punctured_enum.expect("puncture implies enumeration");
            let mut sec = CodeSection {
                enumerated: Some(EnumeratedCode {
                    params: code_params(&wd).map_err(at(Stage::Puncture))?,
                    claimed_dimension: 2 * m + 1,
                    distribution: wd,
                }),
                ..Default::default()
            };
            if cfg.has(Check::Predict) {
                let kind = if f.family() == Family::F2Cm { PuncturedKind::Cm } else { PuncturedKind::PnDo };
                let pred = predict_punctured(p, m, kind).map_err(at(Stage::Puncture))?;
                let e = &sec.enumerated.as_ref().unwrap().distribution;
                sec.verdict = Some(MatchVerdict::compare(e, &pred.distribution));
                sec.predicted = Some(pred);
            }
            finish_section(cfg, &mut sec, p)?;
            report.punctured = Some(sec);
        }
    }

    let mut failures = Vec::new();
    if report.pn_verified == Some(false) {
        failures.push("verify_pn".to_string());
    }
    if let Some(e) = &report.code.enumerated {
        if e.distribution.k != e.claimed_dimension {
            failures.push("dimension".to_string());
        }
    }
    report.code.failures("", &mut failures);
    if let Some(sec) = &report.punctured {
        sec.failures("punctured.", &mut failures);
    }
    if report.nu.as_ref().is_some_and(|n| !n.holds) {
        failures.push("nu".to_string());
    }
    if report.det_relation.is_some_and(|d| d.monomial && !(d.square_class_holds && d.scalar_holds)) {
        failures.push("det_relation".to_string());
    }
    report.failures = failures;
    Ok(report)
}

/// Predictions only: `ε` where needed, the closed-form tables and the
/// claimed dual; no enumeration.
pub fn predict_only(cfg: &ExperimentConfig) -> std::result::Result<Report, StageError> {
    let cfg = cfg.clone().with_checks([Check::Predict]);
    run_experiment(&cfg)
}

/// Render a report in the named format.
pub fn emit_report(report: &Report, format: &str) -> Result<String> {
    Ok(emit(report, format.parse()?))
}

pub fn emit(report: &Report, format: Emit) -> String {
    match format {
        Emit::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Emit::Text => emit_text(report),
        Emit::Csv => emit_csv(report, None),
    }
}

fn modulus_string(modulus: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &c) in modulus.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coeff = if c == 1 && i > 0 { String::new() } else { c.to_string() };
        parts.push(match i {
            0 => coeff,
            1 => format!("{coeff}x"),
            _ => format!("{coeff}x^{i}"),
        });
    }
    parts.join("+")
}

fn section_text(out: &mut String, label: &str, sec: &CodeSection) {
    use std::fmt::Write;
    if let Some(e) = &sec.enumerated {
        let _ = writeln!(out, "{label} enumerated {}: {}", e.params, e.distribution.enumerator_string());
        if e.distribution.k != e.claimed_dimension {
            let _ = writeln!(
                out,
                "{label} dimension {} (expected {}): the map (a,b,c) -> codeword is not injective",
                e.distribution.k, e.claimed_dimension
            );
        }
    }
    if let Some(pr) = &sec.predicted {
        let _ = writeln!(out, "{label} predicted ({}): {}", pr.source, pr.distribution.enumerator_string());
        if let Some(note) = &pr.degenerate {
            let _ = writeln!(out, "{label} note: {note}");
        }
    }
    if let Some(v) = &sec.verdict {
        match v.first_difference {
            None => {
                let _ = writeln!(out, "{label} match: exact");
            }
            Some(w) => {
                let _ = writeln!(out, "{label} match: MISMATCH at weight {w}");
            }
        }
    }
    if let Some(d) = &sec.dual {
        let params = d.params.map_or("zero code".to_string(), |p| p.to_string());
        let low: Vec<String> = d.low_weights.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{label} dual: {params}, A1..A4 = {}", low.join(" "));
        if let Some(c) = d.claim {
            let ok = if d.claim_holds == Some(true) { "holds" } else { "FAILS" };
            let _ = writeln!(out, "{label} dual claim {c}: {ok}");
        }
        if let Some(ok) = d.a4_holds {
            let _ = writeln!(out, "{label} dual A4 claim: {}", if ok { "holds" } else { "FAILS" });
        }
        if !d.involution_holds {
            let _ = writeln!(out, "{label} dual involution: FAILS");
        }
    }
    if let Some(pl) = &sec.pless {
        let status = if pl.holds { "hold" } else { "FAIL" };
        let _ = writeln!(out, "{label} power moments: {status} (residuals {})", pl.residuals.join(" "));
    }
    for b in &sec.bounds {
        let bound = serde_json::to_value(b.bound).unwrap();
        let verdict = serde_json::to_value(b.verdict).unwrap();
        let _ = writeln!(
            out,
            "{label} bound {} on [{},{},{}]_{}: {} (largest admissible d = {})",
            bound.as_str().unwrap(),
            b.n,
            b.k,
            b.d,
            b.q,
            verdict.as_str().unwrap(),
            b.max_d
        );
    }
}

fn emit_text(r: &Report) -> String {
    use std::fmt::Write;
    let c = &r.config;
    let mut out = String::new();
    let _ = writeln!(out, "pncodes {}", r.version);
    let _ = writeln!(out, "field: F_{}^{} mod {}", c.p, c.m, modulus_string(&r.modulus));
    let _ = writeln!(out, "function: {}", r.function);
    let checks: Vec<String> = c.checks.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "checks: {}", if checks.is_empty() { "none".into() } else { checks.join(",") });
    if let Some(ok) = r.pn_verified {
        let _ = writeln!(out, "perfect nonlinear: {}", if ok { "yes" } else { "NO" });
    }
    if let Some(e) = r.epsilon {
        let _ = writeln!(out, "epsilon: {e:+}");
    }
    section_text(&mut out, "code", &r.code);
    if let Some(sec) = &r.punctured {
        section_text(&mut out, "punctured", sec);
    }
    if let Some(n) = &r.nu {
        let _ = writeln!(out, "nu: {} of {} values mismatch", n.mismatches, n.checked);
    }
    if let Some(d) = &r.det_relation {
        let _ = writeln!(
            out,
            "det relation over {} scalars: square class {}, exact {}{}",
            d.checked,
            if d.square_class_holds { "holds" } else { "fails" },
            if d.scalar_holds { "holds" } else { "fails" },
            if d.monomial { "" } else { " (not a monomial; informational)" }
        );
    }
    if let Some(msg) = &r.incomplete {
        let _ = writeln!(out, "INCOMPLETE: {msg}");
    }
    if let Some(t) = r.timing {
        let _ = writeln!(out, "elapsed: {t:.3}s");
    }
    let status = if !r.failures.is_empty() {
        format!("FAIL ({})", r.failures.join(", "))
    } else if r.incomplete.is_some() {
        "incomplete".to_string()
    } else {
        "pass".to_string()
    };
    let _ = writeln!(out, "status: {status}");
    out
}

/// `code,weight,enumerated,predicted,flag` rows; `flag` is `mismatch` when
/// both counts are present and differ. With a label, a leading
/// `experiment` column is added.
pub fn emit_csv(r: &Report, label: Option<&str>) -> String {
    let mut out = String::new();
    if label.is_none() {
        out.push_str("code,weight,enumerated,predicted,flag\n");
    }
    let mut sections = vec![("full", &r.code)];
    if let Some(p) = &r.punctured {
        sections.push(("punctured", p));
    }
    for (name, sec) in sections {
        let en = sec.enumerated.as_ref().map(|e| &e.distribution);
        let pr = sec.predicted.as_ref().map(|p| &p.distribution);
        let weights: BTreeSet<usize> = en
            .iter()
            .chain(pr.iter())
            .flat_map(|d| d.counts.keys().copied())
            .collect();
        for w in weights {
            let a = en.map(|d| d.count(w));
            let b = pr.map(|d| d.count(w));
            let flag = match (&a, &b) {
                (Some(a), Some(b)) if a != b => "mismatch",
                _ => "",
            };
            let show = |v: Option<BigUint>| v.map_or(String::new(), |v| v.to_string());
            if let Some(l) = label {
                out.push_str(l);
                out.push(',');
            }
            out.push_str(&format!("{name},{w},{},{},{flag}\n", show(a), show(b)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(toml: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml(toml).unwrap()
    }

    #[test]
    fn config_roundtrip_and_all_filtering() {
        let c = cfg("p = 3\nm = 2\nfamily = \"cm\"\nk = 1\n");
        assert!(c.has(Check::Nu));
        assert!(!c.has(Check::DetRelation));
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("p = 3\nm = 2\nfamily = \"f1\"\nkk = 1\n").is_err());
    }

    #[test]
    fn inapplicable_check_is_invalid() {
        let c = cfg("p = 3\nm = 2\nfamily = \"f1\"\nk = 0\nchecks = [\"nu\"]\n");
        let err = run_experiment(&c).unwrap_err();
        assert_eq!(err.stage, Stage::Config);
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn elem_specs() {
        let ctx = crate::field::make_field(5, 2).unwrap();
        let xi = ctx.primitive_element();
        assert_eq!(ElemSpec::Named("primitive".into()).resolve(&ctx).unwrap(), xi);
        assert_eq!(ElemSpec::Named("primitive^2".into()).resolve(&ctx).unwrap(), ctx.mul(xi, xi));
        assert_eq!(ElemSpec::Int(7).resolve(&ctx).unwrap(), 7);
        assert!(ElemSpec::Int(25).resolve(&ctx).is_err());
        assert!(ElemSpec::Named("xi".into()).resolve(&ctx).is_err());
    }

    #[test]
    fn set_param_overrides() {
        let mut c = ExperimentConfig::new(3, 3, Family::F1);
        c.set_param("k=1").unwrap();
        c.set_param("beta=primitive").unwrap();
        assert_eq!(c.k, Some(1));
        assert_eq!(c.beta, Some(ElemSpec::Named("primitive".into())));
        assert!(c.set_param("k").is_err());
        assert!(c.set_param("zz=1").is_err());
    }

    #[test]
    fn modulus_rendering() {
        assert_eq!(modulus_string(&[2, 1, 1]), "x^2+x+2");
        assert_eq!(modulus_string(&[1, 0, 1]), "x^2+1");
    }

    #[test]
    fn budget_exhaustion_is_partial() {
        let mut c = cfg("p = 3\nm = 3\nfamily = \"f1\"\nk = 0\n");
        c.budget = Some(5);
        let r = run_experiment(&c).unwrap();
        assert!(r.incomplete.is_some());
        assert_eq!(r.exit_code(), 3);
        assert!(emit(&r, Emit::Json).contains("\"incomplete\""));
    }

    #[test]
    fn unknown_format() {
        let c = cfg("p = 3\nm = 2\nfamily = \"f1\"\nk = 0\nchecks = []\n");
        let r = run_experiment(&c).unwrap();
        assert!(matches!(emit_report(&r, "xml"), Err(Error::InvalidParameter(_))));
    }
}
