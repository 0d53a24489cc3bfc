use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::ground::{eval3, ground, AtomTable, ConstantMappings, Ground};
use super::{Budget, FiniteModel, OracleError, Vocabulary};
use crate::fol::Formula;

/// Depth-first model enumeration over ground atoms. Partial assignments are
/// pruned as soon as the filter evaluates to false under Kleene semantics.
pub struct ModelIter {
    table: AtomTable,
    constants: Vec<String>,
    filters: Vec<Formula>,
    mappings: ConstantMappings,
    current: Option<Frame>,
    budget: Budget,
    failed: bool,
}

struct Frame {
    constant_map: BTreeMap<String, usize>,
    filter: Ground,
    assign: Vec<Option<bool>>,
    depth: usize,
    /// Whether the node at `depth` still needs evaluating.
    fresh: bool,
}

impl ModelIter {
    pub(crate) fn new(vocab: &Vocabulary, size: usize, filters: &[Formula], budget: u64) -> Self {
        let table = AtomTable::new(vocab.predicates.iter().cloned(), size);
        let constants: Vec<String> = vocab.constants.iter().cloned().collect();
        let mappings = ConstantMappings::new(constants.len(), size);
        ModelIter {
            table,
            constants,
            filters: filters.to_vec(),
            mappings,
            current: None,
            budget: Budget::new(budget),
            failed: false,
        }
    }

    fn open_frame(&mut self) -> Result<bool, OracleError> {
        let Some(mapping) = self.mappings.next() else {
            return Ok(false);
        };
        let constant_map: BTreeMap<String, usize> = self.constants.iter().cloned().zip(mapping).collect();
        let mut parts = Vec::with_capacity(self.filters.len());
        for f in &self.filters {
            parts.push(ground(f, &self.table, &constant_map)?);
        }
        let filter = Ground::And(parts);
        self.current = Some(Frame { constant_map, filter, assign: alloc::vec![None; self.table.len], depth: 0, fresh: true });
        Ok(true)
    }

    fn model_of(&self, frame: &Frame) -> FiniteModel {
        let mut interpretation: BTreeMap<(String, usize), _> =
            self.table.preds.iter().map(|p| (p.clone(), alloc::collections::BTreeSet::new())).collect();
        for (i, v) in frame.assign.iter().enumerate() {
            if *v == Some(true) {
                let (p, tuple) = self.table.decode(i);
                interpretation.get_mut(&self.table.preds[p]).unwrap().insert(tuple);
            }
        }
        FiniteModel { domain: (0..self.table.size).collect(), interpretation, constant_map: frame.constant_map.clone() }
    }

    fn step(&mut self) -> Result<Option<FiniteModel>, OracleError> {
        loop {
            if self.current.is_none() && !self.open_frame()? {
                return Ok(None);
            }
            let mut frame = self.current.take().unwrap();
            let found = loop {
                if frame.fresh {
                    frame.fresh = false;
                    self.budget.tick()?;
                    match eval3(&frame.filter, &frame.assign) {
                        Some(false) => {}
                        _ if frame.depth == self.table.len => break Some(self.model_of(&frame)),
                        _ => {
                            frame.assign[frame.depth] = Some(false);
                            frame.depth += 1;
                            frame.fresh = true;
                            continue;
                        }
                    }
                }
                if !backtrack(&mut frame) {
                    break None;
                }
            };
            match found {
                Some(model) => {
                    self.current = Some(frame);
                    return Ok(Some(model));
                }
                None => continue,
            }
        }
    }
}

/// Moves to the next sibling, or pops until one exists.
fn backtrack(frame: &mut Frame) -> bool {
    while frame.depth > 0 {
        let last = frame.depth - 1;
        if frame.assign[last] == Some(false) {
            frame.assign[last] = Some(true);
            frame.fresh = true;
            return true;
        }
        frame.assign[last] = None;
        frame.depth -= 1;
    }
    false
}

impl Iterator for ModelIter {
    type Item = Result<FiniteModel, OracleError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.step() {
            Ok(Some(m)) => Some(Ok(m)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}
