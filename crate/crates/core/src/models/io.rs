//! Plain-text classifier files.
//!
//! Boosted trees are written as a header followed by one `tree` line per
//! round, each tree as a preorder node list:
//!
//! ```text
//! fraudgan-boosted 1
//! base_score=-2.1972245773362196
//! n_features=2
//! shrinkage=0.1
//! lambda=1
//! max_depth=4
//! tree
//! split 1 0.5
//! leaf -0.03
//! leaf 0.07
//! ```
//!
//! A `split feature threshold` line is followed by its left subtree (rows
//! with `x[feature] <= threshold`) and then its right subtree.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

use super::boosted::{BoostConfig, BoostedTreesModel, Node, Tree};
use super::logistic::{LogisticConfig, LogisticModel};
use super::Fitted;

const BOOSTED_MAGIC: &str = "fraudgan-boosted 1";
const LOGISTIC_MAGIC: &str = "fraudgan-logistic 1";

fn write_tree(tree: &Tree, out: &mut impl Write) -> Result<()> {
    // nodes are stored in preorder already
    for node in &tree.nodes {
        match *node {
            Node::Split { feature, threshold, .. } => writeln!(out, "split {feature} {threshold:?}")?,
            Node::Leaf(v) => writeln!(out, "leaf {v:?}")?,
        }
    }
    Ok(())
}

pub fn write_classifier(model: &Fitted, out: &mut impl Write) -> Result<()> {
    match model {
        Fitted::Boosted(m) => {
            writeln!(out, "{BOOSTED_MAGIC}")?;
            writeln!(out, "base_score={:?}", m.base_score)?;
            writeln!(out, "n_features={}", m.n_features)?;
            writeln!(out, "shrinkage={:?}", m.config.shrinkage)?;
            writeln!(out, "lambda={:?}", m.config.lambda)?;
            writeln!(out, "max_depth={}", m.config.max_depth)?;
            for t in &m.trees {
                writeln!(out, "tree")?;
                write_tree(t, out)?;
            }
        }
        Fitted::Logistic(m) => {
            writeln!(out, "{LOGISTIC_MAGIC}")?;
            writeln!(out, "learning_rate={:?}", m.config.learning_rate)?;
            writeln!(out, "max_epochs={}", m.config.max_epochs)?;
            writeln!(out, "tolerance={:?}", m.config.tolerance)?;
            writeln!(out, "l2={:?}", m.config.l2)?;
            writeln!(out, "epochs={}", m.epochs)?;
            writeln!(out, "bias={:?}", m.bias)?;
            let w: Vec<String> = m.weights.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "weights={}", w.join(" "))?;
        }
    }
    Ok(())
}

fn num<T: std::str::FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::data(format!("bad {what} {s:?} in classifier file")))
}

fn parse_tree(lines: &[String], pos: &mut usize, nodes: &mut Vec<Node>, n_features: usize) -> Result<usize> {
    let line = lines
        .get(*pos)
        .ok_or_else(|| Error::data("tree ended early"))?;
    *pos += 1;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let me = nodes.len();
    match parts.as_slice() {
        ["leaf", v] => nodes.push(Node::Leaf(num("leaf value", v)?)),
        ["split", f, t] => {
            let feature: usize = num("feature", f)?;
            if feature >= n_features {
                return Err(Error::data(format!("split on feature {feature} of {n_features}")));
            }
            let threshold = num("threshold", t)?;
            nodes.push(Node::Leaf(0.0));
            let left = parse_tree(lines, pos, nodes, n_features)?;
            let right = parse_tree(lines, pos, nodes, n_features)?;
            nodes[me] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        _ => return Err(Error::data(format!("bad tree line {line:?}"))),
    }
    Ok(me)
}

pub fn read_classifier(input: impl BufRead) -> Result<Fitted> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let lines: Vec<String> = lines.into_iter().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
    let magic = lines.first().map(String::as_str);
    let header = |key: &str| -> Result<&str> {
        lines
            .iter()
            .take_while(|l| *l != "tree")
            .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
            .ok_or_else(|| Error::data(format!("classifier file lacks {key}")))
    };
    match magic {
        Some(BOOSTED_MAGIC) => {
            let n_features: usize = num("n_features", header("n_features")?)?;
            let config = BoostConfig {
                shrinkage: num("shrinkage", header("shrinkage")?)?,
                lambda: num("lambda", header("lambda")?)?,
                max_depth: num("max_depth", header("max_depth")?)?,
                rounds: 0,
            };
            let mut pos = lines.iter().position(|l| l == "tree").unwrap_or(lines.len());
            let mut trees = Vec::new();
            while pos < lines.len() {
                if lines[pos] != "tree" {
                    return Err(Error::data(format!("expected `tree`, found {:?}", lines[pos])));
                }
                pos += 1;
                let mut nodes = Vec::new();
                parse_tree(&lines, &mut pos, &mut nodes, n_features)?;
                trees.push(Tree { nodes });
            }
            Ok(Fitted::Boosted(BoostedTreesModel {
                base_score: num("base_score", header("base_score")?)?,
                n_features,
                config: BoostConfig {
                    rounds: trees.len(),
                    ..config
                },
                trees,
            }))
        }
        Some(LOGISTIC_MAGIC) => {
            let weights = header("weights")?
                .split_whitespace()
                .map(|w| num("weight", w))
                .collect::<Result<Vec<f64>>>()?;
            Ok(Fitted::Logistic(LogisticModel {
                weights,
                bias: num("bias", header("bias")?)?,
                epochs: num("epochs", header("epochs")?)?,
                config: LogisticConfig {
                    learning_rate: num("learning_rate", header("learning_rate")?)?,
                    max_epochs: num("max_epochs", header("max_epochs")?)?,
                    tolerance: num("tolerance", header("tolerance")?)?,
                    l2: num("l2", header("l2")?)?,
                },
            }))
        }
        _ => Err(Error::data("not a fraudgan classifier file")),
    }
}
