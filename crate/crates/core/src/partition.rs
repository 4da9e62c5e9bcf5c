//! Hard node labelings shared by the detectors and the metrics.

use std::io::Write;

use serde::Serialize;

use crate::belief::LabelFrame;
use crate::error::Result;
use crate::graph::Graph;

/// Label written for nodes that commit to no community.
pub const OUTLIER_LABEL: &str = "OUTLIER";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assignment {
    Community(usize),
    Outlier,
}

impl Assignment {
    pub fn community(self) -> Option<usize> {
        match self {
            Assignment::Community(k) => Some(k),
            Assignment::Outlier => None,
        }
    }

    pub fn is_outlier(self) -> bool {
        self == Assignment::Outlier
    }
}

/// One assignment per graph node, interpreted through `frame`.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeling {
    pub frame: LabelFrame,
    pub assignments: Vec<Assignment>,
}

#[derive(Debug, Serialize)]
struct LabelRecord<'a> {
    node_id: &'a str,
    label: &'a str,
}

impl Labeling {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn name_of(&self, node: usize) -> &str {
        match self.assignments[node] {
            Assignment::Community(k) => self.frame.label(k),
            Assignment::Outlier => OUTLIER_LABEL,
        }
    }

    pub fn outliers(&self) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter(|(_, a)| a.is_outlier())
            .map(|(i, _)| i)
            .collect()
    }

    /// Block index per node; outliers form one extra block after the frame.
    pub fn block_ids(&self) -> Vec<usize> {
        let outlier_block = self.frame.len();
        self.assignments
            .iter()
            .map(|a| a.community().unwrap_or(outlier_block))
            .collect()
    }

    /// `node_id,label` rows in graph order.
    pub fn write_csv<W: Write>(&self, g: &Graph, mut out: W) -> Result<()> {
        writeln!(out, "node_id,label")?;
        for i in 0..self.len() {
            writeln!(out, "{},{}", g.id(i), self.name_of(i))?;
        }
        Ok(())
    }

    pub fn to_json(&self, g: &Graph) -> serde_json::Value {
        let records: Vec<LabelRecord> = (0..self.len())
            .map(|i| LabelRecord {
                node_id: g.id(i),
                label: self.name_of(i),
            })
            .collect();
        serde_json::to_value(records).expect("label records serialize")
    }
}
