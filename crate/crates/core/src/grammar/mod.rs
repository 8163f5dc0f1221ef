//! Grammatical-inference monitor.
//!
//! The input and output streams of a controlled process are codified into
//! symbol sequences: each quantisation level of the output becomes a terminal
//! symbol, each level of the input a nonterminal. A single pass over aligned
//! sequences infers context-dependent productions of increasing depth — a
//! production records that, after a given run of recent output symbols and
//! under a given input symbol, a particular output symbol followed. A deeper
//! production is only admitted once its shallower reduction is already
//! established, which keeps the production set closed under context
//! shortening and makes inference order-deterministic.
//!
//! Monitoring slices fresh data into fixed-length words, predicts each word
//! from the grammar (always conditioning on the *observed* history, so one
//! miss cannot cascade), and measures the weighted edit distance between
//! prediction and observation. A word whose distance exceeds the configured
//! threshold is flagged as a fault.

mod edit;

pub use edit::{edit_distance, EditCosts};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::{normalize_tracked, quantize, EncodeError, EncodingConfig};
use crate::signals::SignalSeries;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("aligned sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("observation must contain at least one position")]
    EmptyObservation,
    #[error("edit costs must be finite and non-negative (got {0})")]
    BadCost(f64),
    #[error("word length must be at least 1")]
    BadWordLength,
    #[error("fault threshold must be positive and finite (got {0})")]
    BadThreshold(f64),
    #[error("{len} samples cannot fill one word of {word_length} symbols")]
    TooShort { len: usize, word_length: usize },
    #[error("malformed grammar: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("malformed grammar: {0}")]
    Invalid(String),
}

/// Output-level symbol `y_j`: one terminal per quantisation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Terminal(pub u16);

/// Input-level symbol `U_i`: one nonterminal per quantisation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NonTerminal(pub u16);

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}", self.0)
    }
}

impl fmt::Display for NonTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{}", self.0)
    }
}

/// The symbol inventory of a grammar. Terminals and nonterminals live in
/// separate types and the two distinguished symbols in a namespace of their
/// own, so the four parts are pairwise disjoint by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabets {
    pub terminals: BTreeSet<Terminal>,
    pub nonterminals: BTreeSet<NonTerminal>,
}

impl Alphabets {
    /// Rendering of the distinguished start symbol.
    pub const START: &'static str = "S";
    /// Rendering of the continuation wildcard that closes every production.
    pub const WILDCARD: &'static str = "δ";
}

/// Identity of a production: the recent-output context (oldest first), the
/// input symbol in force, and the output symbol that followed. Its depth is
/// the context length; the observation count lives in the grammar's map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ProductionKey {
    pub context: Vec<Terminal>,
    pub nonterminal: NonTerminal,
    pub output: Terminal,
}

impl ProductionKey {
    pub fn depth(&self) -> usize {
        self.context.len()
    }

    /// The same production with the oldest context symbol dropped
    /// (`None` at depth 0).
    pub fn reduction(&self) -> Option<ProductionKey> {
        if self.context.is_empty() {
            return None;
        }
        Some(ProductionKey {
            context: self.context[1..].to_vec(),
            nonterminal: self.nonterminal,
            output: self.output,
        })
    }
}

/// Persisted shape of one production.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductionDoc {
    context: Vec<u16>,
    nonterminal: u16,
    output: u16,
    count: u64,
}

/// Persisted shape of a [`Grammar`].
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrammarDoc {
    input_cfg: EncodingConfig,
    output_cfg: EncodingConfig,
    max_depth: usize,
    productions: Vec<ProductionDoc>,
}

/// An inferred grammar: counted productions up to a depth cap, plus the
/// encodings that turn raw series into its symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    input_cfg: EncodingConfig,
    output_cfg: EncodingConfig,
    max_depth: usize,
    productions: BTreeMap<ProductionKey, u64>,
}

impl Grammar {
    pub fn new(
        input_cfg: EncodingConfig,
        output_cfg: EncodingConfig,
        max_depth: usize,
    ) -> Result<Self, GrammarError> {
        input_cfg.validate()?;
        output_cfg.validate()?;
        Ok(Self {
            input_cfg,
            output_cfg,
            max_depth,
            productions: BTreeMap::new(),
        })
    }

    pub fn input_cfg(&self) -> &EncodingConfig {
        &self.input_cfg
    }

    pub fn output_cfg(&self) -> &EncodingConfig {
        &self.output_cfg
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn productions(&self) -> &BTreeMap<ProductionKey, u64> {
        &self.productions
    }

    /// Symbols actually used by at least one production.
    pub fn alphabets(&self) -> Alphabets {
        let mut terminals = BTreeSet::new();
        let mut nonterminals = BTreeSet::new();
        for key in self.productions.keys() {
            terminals.extend(key.context.iter().copied());
            terminals.insert(key.output);
            nonterminals.insert(key.nonterminal);
        }
        Alphabets {
            terminals,
            nonterminals,
        }
    }

    /// Feed one aligned observation pair; production counts accumulate
    /// across calls.
    ///
    /// At each position the depth-0 production (input symbol, next output) is
    /// always counted. A depth-`n+1` production is only counted if its
    /// depth-`n` reduction already existed *before* this position was
    /// processed, so depth grows by at most one per revisit of a context.
    pub fn observe(
        &mut self,
        inputs: &[NonTerminal],
        outputs: &[Terminal],
    ) -> Result<(), GrammarError> {
        if inputs.len() != outputs.len() {
            return Err(GrammarError::LengthMismatch {
                left: inputs.len(),
                right: outputs.len(),
            });
        }
        if inputs.is_empty() {
            return Err(GrammarError::EmptyObservation);
        }
        let input_max = self.input_cfg.max_level();
        let output_max = self.output_cfg.max_level();
        for s in inputs {
            if s.0 > input_max {
                return Err(EncodeError::LevelOutOfRange {
                    level: s.0,
                    max: input_max,
                }
                .into());
            }
        }
        for s in outputs {
            if s.0 > output_max {
                return Err(EncodeError::LevelOutOfRange {
                    level: s.0,
                    max: output_max,
                }
                .into());
            }
        }
        for t in 0..inputs.len() {
            let deepest = self.max_depth.min(t);
            // membership snapshot before anything at this position is added
            let existed: Vec<bool> = (0..=deepest)
                .map(|n| {
                    self.productions
                        .contains_key(&self.candidate(inputs, outputs, t, n))
                })
                .collect();
            for n in 0..=deepest {
                if n > 0 && !existed[n - 1] {
                    // the shallower reduction was not established yet; by
                    // closure no deeper candidate can be established either
                    break;
                }
                *self
                    .productions
                    .entry(self.candidate(inputs, outputs, t, n))
                    .or_insert(0) += 1;
            }
        }
        Ok(())
    }

    fn candidate(
        &self,
        inputs: &[NonTerminal],
        outputs: &[Terminal],
        t: usize,
        depth: usize,
    ) -> ProductionKey {
        ProductionKey {
            context: outputs[t - depth..t].to_vec(),
            nonterminal: inputs[t],
            output: outputs[t],
        }
    }

    /// Predict the output word for `inputs`, conditioning every position on
    /// the *observed* output history.
    ///
    /// The deepest context with any matching production wins; within a depth
    /// the highest count wins and ties break towards the lowest output
    /// level. A position no production covers yields [`WordSymbol::Unknown`].
    pub fn predict(
        &self,
        inputs: &[NonTerminal],
        observed: &[Terminal],
    ) -> Result<Vec<WordSymbol>, GrammarError> {
        if inputs.len() != observed.len() {
            return Err(GrammarError::LengthMismatch {
                left: inputs.len(),
                right: observed.len(),
            });
        }
        let mut word = Vec::with_capacity(inputs.len());
        for t in 0..inputs.len() {
            let deepest = self.max_depth.min(t);
            let mut choice = None;
            for n in (0..=deepest).rev() {
                let context = observed[t - n..t].to_vec();
                let lo = ProductionKey {
                    context: context.clone(),
                    nonterminal: inputs[t],
                    output: Terminal(0),
                };
                let hi = ProductionKey {
                    context,
                    nonterminal: inputs[t],
                    output: Terminal(u16::MAX),
                };
                let mut best: Option<(u64, Terminal)> = None;
                // ascending output order, so on equal counts the first
                // (lowest-level) candidate is kept
                for (key, &count) in self.productions.range(lo..=hi) {
                    if best.is_none_or(|(c, _)| count > c) {
                        best = Some((count, key.output));
                    }
                }
                if let Some((_, output)) = best {
                    choice = Some(output);
                    break;
                }
            }
            word.push(choice.map_or(WordSymbol::Unknown, WordSymbol::Known));
        }
        Ok(word)
    }

    /// Check internal consistency: encodings valid, all symbols within their
    /// level ranges, depths capped, counts positive, and every deeper
    /// production backed by its context-shortened reduction.
    pub fn validate(&self) -> Result<(), GrammarError> {
        self.input_cfg.validate()?;
        self.output_cfg.validate()?;
        let input_max = self.input_cfg.max_level();
        let output_max = self.output_cfg.max_level();
        for (key, &count) in &self.productions {
            if count == 0 {
                return Err(GrammarError::Invalid(format!(
                    "production {key:?} has a zero count"
                )));
            }
            if key.depth() > self.max_depth {
                return Err(GrammarError::Invalid(format!(
                    "production depth {} exceeds the cap {}",
                    key.depth(),
                    self.max_depth
                )));
            }
            if key.nonterminal.0 > input_max {
                return Err(GrammarError::Invalid(format!(
                    "input symbol {} outside 0..={input_max}",
                    key.nonterminal
                )));
            }
            for symbol in key.context.iter().chain([&key.output]) {
                if symbol.0 > output_max {
                    return Err(GrammarError::Invalid(format!(
                        "output symbol {symbol} outside 0..={output_max}"
                    )));
                }
            }
            if let Some(reduction) = key.reduction() {
                if !self.productions.contains_key(&reduction) {
                    return Err(GrammarError::Invalid(format!(
                        "production {key:?} lacks its shortened form {reduction:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = GrammarDoc {
            input_cfg: self.input_cfg,
            output_cfg: self.output_cfg,
            max_depth: self.max_depth,
            productions: self
                .productions
                .iter()
                .map(|(key, &count)| ProductionDoc {
                    context: key.context.iter().map(|t| t.0).collect(),
                    nonterminal: key.nonterminal.0,
                    output: key.output.0,
                    count,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("grammar serialises");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, GrammarError> {
        let doc: GrammarDoc = serde_json::from_str(text)?;
        let mut productions = BTreeMap::new();
        for p in doc.productions {
            let key = ProductionKey {
                context: p.context.into_iter().map(Terminal).collect(),
                nonterminal: NonTerminal(p.nonterminal),
                output: Terminal(p.output),
            };
            if productions.insert(key.clone(), p.count).is_some() {
                return Err(GrammarError::Invalid(format!(
                    "duplicate production {key:?}"
                )));
            }
        }
        let grammar = Self {
            input_cfg: doc.input_cfg,
            output_cfg: doc.output_cfg,
            max_depth: doc.max_depth,
            productions,
        };
        grammar.validate()?;
        Ok(grammar)
    }
}

/// A symbol of a predicted word. `Unknown` (rendered `⊥`) marks a position
/// no production covered; it compares unequal to everything *including
/// itself*, so it can never be a free match in an edit script.
#[derive(Debug, Clone, Copy)]
pub enum WordSymbol {
    Known(Terminal),
    Unknown,
}

impl PartialEq for WordSymbol {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (WordSymbol::Known(a), WordSymbol::Known(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for WordSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordSymbol::Known(t) => t.fmt(f),
            WordSymbol::Unknown => f.write_str("⊥"),
        }
    }
}

/// Aligned symbol streams produced by [`codify_series`], with counts of
/// samples that had to be clamped into the encoding ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct Codified {
    pub inputs: Vec<NonTerminal>,
    pub outputs: Vec<Terminal>,
    pub clamped_inputs: usize,
    pub clamped_outputs: usize,
}

/// Turn an aligned input/output series pair into symbol sequences by
/// normalising and quantising every sample.
pub fn codify_series(
    u: &SignalSeries,
    y: &SignalSeries,
    input_cfg: &EncodingConfig,
    output_cfg: &EncodingConfig,
) -> Result<Codified, GrammarError> {
    input_cfg.validate()?;
    output_cfg.validate()?;
    if u.len() != y.len() {
        return Err(GrammarError::LengthMismatch {
            left: u.len(),
            right: y.len(),
        });
    }
    let mut inputs = Vec::with_capacity(u.len());
    let mut clamped_inputs = 0;
    for &x in u.samples() {
        let (v, clamped) = normalize_tracked(x, input_cfg)?;
        clamped_inputs += usize::from(clamped);
        inputs.push(NonTerminal(quantize(v, input_cfg.bits)?));
    }
    let mut outputs = Vec::with_capacity(y.len());
    let mut clamped_outputs = 0;
    for &x in y.samples() {
        let (v, clamped) = normalize_tracked(x, output_cfg)?;
        clamped_outputs += usize::from(clamped);
        outputs.push(Terminal(quantize(v, output_cfg.bits)?));
    }
    Ok(Codified {
        inputs,
        outputs,
        clamped_inputs,
        clamped_outputs,
    })
}

/// Codify a series pair and infer a grammar from it in one step.
pub fn infer_grammar(
    u: &SignalSeries,
    y: &SignalSeries,
    input_cfg: &EncodingConfig,
    output_cfg: &EncodingConfig,
    max_depth: usize,
) -> Result<Grammar, GrammarError> {
    let codified = codify_series(u, y, input_cfg, output_cfg)?;
    let mut grammar = Grammar::new(*input_cfg, *output_cfg, max_depth)?;
    grammar.observe(&codified.inputs, &codified.outputs)?;
    Ok(grammar)
}

/// Monitoring knobs: how many symbols make one compared word, and the edit
/// distance above which (strictly) a word is a fault.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguageMonitorConfig {
    pub word_length: usize,
    pub threshold: f64,
}

impl LanguageMonitorConfig {
    pub fn new(word_length: usize, threshold: f64) -> Result<Self, GrammarError> {
        let cfg = Self {
            word_length,
            threshold,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        if self.word_length == 0 {
            return Err(GrammarError::BadWordLength);
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(GrammarError::BadThreshold(self.threshold));
        }
        Ok(())
    }
}

/// One monitored word: its index, its edit distance from the predicted
/// word, and whether that distance breached the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentOutcome {
    pub index: usize,
    pub distance: f64,
    pub fault: bool,
}

/// Everything a language-monitoring pass produces. A trailing stretch
/// shorter than one word is dropped, so `segments` covers
/// `len / word_length` full words.
#[derive(Debug, Clone, PartialEq)]
pub struct LanguageOutcome {
    pub segments: Vec<SegmentOutcome>,
    pub clamped_inputs: usize,
    pub clamped_outputs: usize,
}

impl LanguageOutcome {
    pub fn fault_count(&self) -> usize {
        self.segments.iter().filter(|s| s.fault).count()
    }
}

/// Slice fresh data into words, predict each word from the grammar, and
/// flag every word whose edit distance exceeds the threshold.
pub fn monitor_language(
    grammar: &Grammar,
    u: &SignalSeries,
    y: &SignalSeries,
    mcfg: &LanguageMonitorConfig,
    costs: &EditCosts,
) -> Result<LanguageOutcome, GrammarError> {
    mcfg.validate()?;
    let codified = codify_series(u, y, grammar.input_cfg(), grammar.output_cfg())?;
    if codified.inputs.len() < mcfg.word_length {
        return Err(GrammarError::TooShort {
            len: codified.inputs.len(),
            word_length: mcfg.word_length,
        });
    }
    let mut segments = Vec::new();
    let words = codified
        .inputs
        .chunks_exact(mcfg.word_length)
        .zip(codified.outputs.chunks_exact(mcfg.word_length));
    for (index, (inputs, outputs)) in words.enumerate() {
        let predicted = grammar.predict(inputs, outputs)?;
        let observed: Vec<WordSymbol> = outputs.iter().map(|&t| WordSymbol::Known(t)).collect();
        let distance = edit_distance(&observed, &predicted, costs);
        segments.push(SegmentOutcome {
            index,
            distance,
            fault: distance > mcfg.threshold,
        });
    }
    Ok(LanguageOutcome {
        segments,
        clamped_inputs: codified.clamped_inputs,
        clamped_outputs: codified.clamped_outputs,
    })
}
