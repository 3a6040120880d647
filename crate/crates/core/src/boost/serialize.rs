//! Plain-text model format.
//!
//! ```text
//! instimpact-model 1
//! learner second_order
//! rounds 100
//! ...
//! base_score 0.8125
//! schema 3f1c0e0d2a9b7c11
//! features 2
//! feature<TAB>sum(AIF)
//! feature<TAB>rel y4
//! trees 1
//! tree<TAB>0
//! split<TAB>sum(AIF)<TAB>2.5<TAB>0.75
//! leaf<TAB>-0.25
//! leaf<TAB>0.5
//! end
//! ```
//!
//! Trees are listed in preorder. Numbers use the shortest representation that
//! parses back to the same value, so a model survives a round trip bit for bit.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::scalar::Scalar;

use super::{BoostError, BoostParams, BoostedModel, Learner, Result, TreeNode};

const MAGIC: &str = "instimpact-model 1";

impl<T: Scalar> BoostedModel<T> {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "learner {}", p.learner);
        let _ = writeln!(s, "rounds {}", p.rounds);
        let _ = writeln!(s, "max_depth {}", p.max_depth);
        let _ = writeln!(s, "learning_rate {}", p.learning_rate);
        let _ = writeln!(s, "lambda {}", p.lambda);
        let _ = writeln!(s, "gamma {}", p.gamma);
        let _ = writeln!(s, "min_child_weight {}", p.min_child_weight);
        let _ = writeln!(s, "base_score {}", self.base_score);
        let _ = writeln!(s, "eta {}", self.learning_rate);
        let _ = writeln!(s, "schema {}", self.fingerprint());
        let _ = writeln!(s, "features {}", self.feature_names.len());
        for name in &self.feature_names {
            let _ = writeln!(s, "feature\t{name}");
        }
        let _ = writeln!(s, "trees {}", self.trees.len());
        for (k, tree) in self.trees.iter().enumerate() {
            let _ = writeln!(s, "tree\t{k}");
            write_node(&mut s, tree, &self.feature_names);
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.expect_exact(MAGIC)?;
        let learner: Learner = lines.keyed("learner")?;
        let rounds = lines.keyed("rounds")?;
        let max_depth = lines.keyed("max_depth")?;
        let learning_rate = lines.keyed("learning_rate")?;
        let lambda = lines.keyed("lambda")?;
        let gamma = lines.keyed("gamma")?;
        let min_child_weight = lines.keyed("min_child_weight")?;
        let base_score: T = lines.keyed("base_score")?;
        let eta: T = lines.keyed("eta")?;
        let fingerprint: String = lines.keyed("schema")?;
        let n_features: usize = lines.keyed("features")?;
        let mut feature_names = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            let (line, fields) = lines.next_fields()?;
            match fields.as_slice() {
                ["feature", name] => feature_names.push(name.to_string()),
                _ => return Err(parse_err(line, "expected `feature<TAB>name`")),
            }
        }
        let params = BoostParams {
            rounds,
            max_depth,
            learning_rate,
            lambda,
            gamma,
            min_child_weight,
            learner,
        };
        let n_trees: usize = lines.keyed("trees")?;
        let mut trees = Vec::with_capacity(n_trees);
        for k in 0..n_trees {
            let (line, fields) = lines.next_fields()?;
            if fields != ["tree".to_string(), k.to_string()] {
                return Err(parse_err(line, format!("expected `tree<TAB>{k}`")));
            }
            trees.push(read_node(&mut lines, &feature_names, 0)?);
        }
        lines.expect_exact("end")?;

        let model = BoostedModel {
            params,
            base_score,
            learning_rate: eta,
            split_counts: super::count_splits(&trees, feature_names.len()),
            trees,
            feature_names,
        };
        if model.fingerprint() != fingerprint {
            return Err(BoostError::SchemaMismatch {
                expected: fingerprint,
                got: model.fingerprint(),
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| BoostError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BoostError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_text(&text)
    }
}

fn write_node<T: Scalar>(s: &mut String, node: &TreeNode<T>, names: &[String]) {
    match node {
        TreeNode::Leaf { weight } => {
            let _ = writeln!(s, "leaf\t{weight}");
        }
        TreeNode::Split {
            feature,
            threshold,
            gain,
            left,
            right,
        } => {
            let _ = writeln!(s, "split\t{}\t{threshold}\t{gain}", names[*feature]);
            write_node(s, left, names);
            write_node(s, right, names);
        }
    }
}

// deep enough for any tree the grower can emit at sane max_depth
const MAX_NESTING: usize = 256;

fn read_node<T: Scalar>(lines: &mut Lines<'_>, names: &[String], depth: usize) -> Result<TreeNode<T>> {
    let (line, fields) = lines.next_fields()?;
    if depth > MAX_NESTING {
        return Err(parse_err(line, "tree nesting too deep"));
    }
    match fields.as_slice() {
        ["leaf", w] => Ok(TreeNode::Leaf {
            weight: parse_num(line, w)?,
        }),
        ["split", name, thr, gain] => {
            let feature = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| parse_err(line, format!("unknown feature `{name}`")))?;
            let threshold = parse_num(line, thr)?;
            let gain = parse_num(line, gain)?;
            let left = read_node(lines, names, depth + 1)?;
            let right = read_node(lines, names, depth + 1)?;
            Ok(TreeNode::Split {
                feature,
                threshold,
                gain,
                left: Box::new(left),
                right: Box::new(right),
            })
        }
        _ => Err(parse_err(line, "expected a `leaf` or `split` line")),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> BoostError {
    BoostError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(line: usize, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{raw}`")))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| parse_err(0, "unexpected end of model text"))
    }

    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>)> {
        let (n, l) = self.next_line()?;
        Ok((n, l.split('\t').collect()))
    }

    fn expect_exact(&mut self, want: &str) -> Result<()> {
        let (n, l) = self.next_line()?;
        if l == want {
            Ok(())
        } else {
            Err(parse_err(n, format!("expected `{want}`")))
        }
    }

    fn keyed<V: FromStr>(&mut self, key: &str) -> Result<V> {
        let (n, l) = self.next_line()?;
        let rest = l
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| parse_err(n, format!("expected `{key} <value>`")))?;
        parse_num(n, rest)
    }
}
