use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Time arguments at which a referenced variable is read.
///
/// For a system target evaluated at `t`, and a band target evaluated at
/// `(t, t₁)`:
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimePattern {
    /// System variable at `t`.
    Current,
    /// Band variable on its delayed diagonal, `(t, t − τ)`.
    Diagonal,
    /// Band variable at `(t₁, t − τ)`: the line opened at `t − τ`, read at
    /// first argument `t₁`.
    SecondArgDelayed,
    /// Band variable at `(t − τ, t₁)`: the same line, read `τ` earlier.
    FirstArgDelayed,
    /// Band variable at `(t, t₁)`.
    Own,
}

impl TimePattern {
    fn reads_system(self) -> bool {
        matches!(self, TimePattern::Current)
    }

    fn allowed_for(self, target: VarKind) -> bool {
        match target {
            VarKind::System => matches!(self, TimePattern::Current | TimePattern::Diagonal),
            VarKind::Band => matches!(
                self,
                TimePattern::Own | TimePattern::SecondArgDelayed | TimePattern::FirstArgDelayed
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    System,
    Band,
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKind::System => f.write_str("system"),
            VarKind::Band => f.write_str("band"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub var: String,
    pub pattern: TimePattern,
    /// Read the complex conjugate of the stored value.
    pub conjugate: bool,
}

impl Reference {
    pub fn new(var: impl Into<String>, pattern: TimePattern) -> Self {
        Self {
            var: var.into(),
            pattern,
            conjugate: false,
        }
    }

    pub fn conj(var: impl Into<String>, pattern: TimePattern) -> Self {
        Self {
            var: var.into(),
            pattern,
            conjugate: true,
        }
    }
}

/// `∂_t target += coefficient · source`, with `coefficient` an energy in eV
/// (the engine divides by `ħ`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub target: String,
    pub coefficient: Complex64,
    pub source: Reference,
}

/// Value assigned to a band line when it opens at `t₁`:
/// `band(t₁, t₁) = coefficient · system(t₁)` (or of its time derivative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSource {
    pub band: String,
    pub coefficient: Complex64,
    pub system: String,
    pub conjugate: bool,
    /// Seed with `∂_t system(t₁)` instead of `system(t₁)`.
    pub derivative: bool,
}

/// A data-driven set of complex linear equations of motion.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EquationSet {
    pub name: String,
    /// The single retardation time shared by every delayed pattern.
    pub delay_fs: f64,
    pub system_vars: Vec<String>,
    pub band_vars: Vec<String>,
    pub terms: Vec<Term>,
    pub sources: Vec<DiagonalSource>,
}

impl EquationSet {
    pub fn new(name: impl Into<String>, delay_fs: f64) -> Self {
        Self {
            name: name.into(),
            delay_fs,
            ..Self::default()
        }
    }

    pub fn system_var(&mut self, name: impl Into<String>) -> &mut Self {
        self.system_vars.push(name.into());
        self
    }

    pub fn band_var(&mut self, name: impl Into<String>) -> &mut Self {
        self.band_vars.push(name.into());
        self
    }

    pub fn term(&mut self, target: impl Into<String>, coefficient: Complex64, source: Reference) -> &mut Self {
        self.terms.push(Term {
            target: target.into(),
            coefficient,
            source,
        });
        self
    }

    pub fn source(
        &mut self,
        band: impl Into<String>,
        coefficient: Complex64,
        system: impl Into<String>,
        conjugate: bool,
    ) -> &mut Self {
        self.sources.push(DiagonalSource {
            band: band.into(),
            coefficient,
            system: system.into(),
            conjugate,
            derivative: false,
        });
        self
    }

    /// Terms whose target is `var`.
    pub fn terms_for<'a>(&'a self, var: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.terms.iter().filter(move |t| t.target == var)
    }

    pub fn source_for(&self, band: &str) -> Option<&DiagonalSource> {
        self.sources.iter().find(|s| s.band == band)
    }

    /// Equation set without any `FirstArgDelayed` reference.
    pub fn without_first_arg_delayed(&self) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| t.source.pattern != TimePattern::FirstArgDelayed);
        out
    }

    /// Checks closure and well-formedness, collecting every problem found.
    pub fn validate(&self) -> Result<(), Vec<ValidationError>> {
        compile(self).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("term for `{target}` references undeclared {kind} variable `{var}`")]
    UnresolvedReference { target: String, var: String, kind: VarKind },
    #[error("term targets undeclared variable `{0}`")]
    UnknownTarget(String),
    #[error("{pattern:?} reference is not allowed in the equation of {kind} variable `{target}`")]
    PatternNotAllowed {
        target: String,
        kind: VarKind,
        pattern: TimePattern,
    },
    #[error("band variable `{0}` has no diagonal source")]
    MissingSource(String),
    #[error("band variable `{0}` has more than one diagonal source")]
    DuplicateSource(String),
    #[error("diagonal source for `{band}` reads undeclared system variable `{system}`")]
    UnresolvedSource { band: String, system: String },
    #[error("diagonal source names undeclared band variable `{0}`")]
    UnknownSourceBand(String),
    #[error("delay {0} fs is not a positive finite time")]
    BadDelay(f64),
    #[error("coefficient on `{0}` is not finite")]
    NonFiniteCoefficient(String),
}

/// Reference resolved to indices.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledRef {
    pub index: usize,
    pub pattern: TimePattern,
    pub conjugate: bool,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledTerm {
    /// Coefficient already divided by ħ (rad/fs).
    pub rate: Complex64,
    pub source: CompiledRef,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CompiledSource {
    pub coefficient: Complex64,
    pub system: usize,
    pub conjugate: bool,
    pub derivative: bool,
}

/// Index-resolved equations. Self-references without conjugation are folded
/// into `decay` and integrated exactly.
#[derive(Debug, Clone)]
pub(crate) struct CompiledEquations {
    pub system_names: Vec<String>,
    pub band_names: Vec<String>,
    pub system_decay: Vec<Complex64>,
    pub band_decay: Vec<Complex64>,
    pub system_terms: Vec<Vec<CompiledTerm>>,
    pub band_terms: Vec<Vec<CompiledTerm>>,
    pub sources: Vec<CompiledSource>,
    pub delay_fs: f64,
}

pub(crate) fn compile(eqs: &EquationSet) -> Result<CompiledEquations, Vec<ValidationError>> {
    let mut errors = Vec::new();
    let hbar = crate::constants::HBAR_EV_FS;

    if !(eqs.delay_fs.is_finite() && eqs.delay_fs > 0.0) {
        errors.push(ValidationError::BadDelay(eqs.delay_fs));
    }

    let mut names: HashMap<&str, (VarKind, usize)> = HashMap::new();
    for (kind, list) in [(VarKind::System, &eqs.system_vars), (VarKind::Band, &eqs.band_vars)] {
        for (i, name) in list.iter().enumerate() {
            if names.insert(name.as_str(), (kind, i)).is_some() {
                errors.push(ValidationError::DuplicateVariable(name.clone()));
            }
        }
    }

    let mut system_decay = vec![Complex64::new(0.0, 0.0); eqs.system_vars.len()];
    let mut band_decay = vec![Complex64::new(0.0, 0.0); eqs.band_vars.len()];
    let mut system_terms = vec![Vec::new(); eqs.system_vars.len()];
    let mut band_terms = vec![Vec::new(); eqs.band_vars.len()];

    for term in &eqs.terms {
        if !term.coefficient.is_finite() {
            errors.push(ValidationError::NonFiniteCoefficient(term.target.clone()));
            continue;
        }
        let Some(&(target_kind, target)) = names.get(term.target.as_str()) else {
            errors.push(ValidationError::UnknownTarget(term.target.clone()));
            continue;
        };
        let pattern = term.source.pattern;
        if !pattern.allowed_for(target_kind) {
            errors.push(ValidationError::PatternNotAllowed {
                target: term.target.clone(),
                kind: target_kind,
                pattern,
            });
            continue;
        }
        let wanted = if pattern.reads_system() {
            VarKind::System
        } else {
            VarKind::Band
        };
        let source = match names.get(term.source.var.as_str()) {
            Some(&(kind, index)) if kind == wanted => index,
            _ => {
                errors.push(ValidationError::UnresolvedReference {
                    target: term.target.clone(),
                    var: term.source.var.clone(),
                    kind: wanted,
                });
                continue;
            }
        };
        let rate = term.coefficient / hbar;
        let is_self =
            source == target && !term.source.conjugate && matches!(pattern, TimePattern::Current | TimePattern::Own);
        match (target_kind, is_self) {
            (VarKind::System, true) => system_decay[target] += rate,
            (VarKind::Band, true) => band_decay[target] += rate,
            (kind, false) => {
                let compiled = CompiledTerm {
                    rate,
                    source: CompiledRef {
                        index: source,
                        pattern,
                        conjugate: term.source.conjugate,
                    },
                };
                match kind {
                    VarKind::System => system_terms[target].push(compiled),
                    VarKind::Band => band_terms[target].push(compiled),
                }
            }
        }
    }

    let mut sources: Vec<Option<CompiledSource>> = vec![None; eqs.band_vars.len()];
    for src in &eqs.sources {
        let band = match names.get(src.band.as_str()) {
            Some(&(VarKind::Band, i)) => i,
            _ => {
                errors.push(ValidationError::UnknownSourceBand(src.band.clone()));
                continue;
            }
        };
        let system = match names.get(src.system.as_str()) {
            Some(&(VarKind::System, i)) => i,
            _ => {
                errors.push(ValidationError::UnresolvedSource {
                    band: src.band.clone(),
                    system: src.system.clone(),
                });
                continue;
            }
        };
        if sources[band].is_some() {
            errors.push(ValidationError::DuplicateSource(src.band.clone()));
            continue;
        }
        sources[band] = Some(CompiledSource {
            coefficient: src.coefficient,
            system,
            conjugate: src.conjugate,
            derivative: src.derivative,
        });
    }
    for (name, src) in eqs.band_vars.iter().zip(&sources) {
        if src.is_none()
            && !errors
                .iter()
                .any(|e| matches!(e, ValidationError::DuplicateVariable(n) if n == name))
        {
            errors.push(ValidationError::MissingSource(name.clone()));
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(CompiledEquations {
        system_names: eqs.system_vars.clone(),
        band_names: eqs.band_vars.clone(),
        system_decay,
        band_decay,
        system_terms,
        band_terms,
        sources: sources.into_iter().map(Option::unwrap).collect(),
        delay_fs: eqs.delay_fs,
    })
}
