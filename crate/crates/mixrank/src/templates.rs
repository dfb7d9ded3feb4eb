//! The six case-sensitive text-to-text formulations.
//!
//! Rendering is byte-exact: segments are joined by single ASCII spaces,
//! placeholders are substituted verbatim, and ranking targets are exactly
//! `true` or `false`. Everything here is a pure function of its inputs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::TrainTriple;
use crate::error::{Error, Result};

/// One text-to-text formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum View {
    Rank,
    RankSwap,
    P2q,
    P2qSwap,
    Q2p,
    RankStar,
}

impl View {
    /// Ranking views classify with true/false targets; the rest generate
    /// text from qrels pairs.
    pub fn is_ranking(self) -> bool {
        matches!(self, View::Rank | View::RankSwap)
    }

    pub const ALL: [View; 6] = [
        View::Rank,
        View::RankSwap,
        View::P2q,
        View::P2qSwap,
        View::Q2p,
        View::RankStar,
    ];
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            View::Rank => "rank",
            View::RankSwap => "rank_swap",
            View::P2q => "p2q",
            View::P2qSwap => "p2q_swap",
            View::Q2p => "q2p",
            View::RankStar => "rank_star",
        };
        f.write_str(s)
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "rank" => Ok(View::Rank),
            "rank_swap" => Ok(View::RankSwap),
            "p2q" => Ok(View::P2q),
            "p2q_swap" => Ok(View::P2qSwap),
            "q2p" => Ok(View::Q2p),
            "rank_star" | "rank*" => Ok(View::RankStar),
            other => Err(Error::InvalidConfig(format!("unknown view `{other}`"))),
        }
    }
}

/// A rendered training instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T2TExample {
    pub source: String,
    pub target: String,
    pub view: View,
}

fn check_pair(q: &str, p: &str) -> Result<()> {
    if q.is_empty() {
        return Err(Error::Template("empty query text".into()));
    }
    if p.is_empty() {
        return Err(Error::Template("empty passage text".into()));
    }
    Ok(())
}

/// Render a ranking instance. `swap` moves the `Relevant:` head from the end
/// to the beginning of the source.
pub fn render_rank(q: &str, p: &str, relevant: bool, swap: bool) -> Result<T2TExample> {
    check_pair(q, p)?;
    let source = if swap {
        format!("Relevant: Query: {q} Document: {p}")
    } else {
        format!("Query: {q} Document: {p} Relevant:")
    };
    Ok(T2TExample {
        source,
        target: if relevant { "true" } else { "false" }.to_string(),
        view: if swap { View::RankSwap } else { View::Rank },
    })
}

/// Render a generation-data instance from a qrels pair (q*, p*).
pub fn render_generation(q: &str, p: &str, view: View) -> Result<T2TExample> {
    check_pair(q, p)?;
    let (source, target) = match view {
        View::P2q => (format!("Document: {p} Translate Document to Query:"), q.to_string()),
        View::P2qSwap => (format!("Translate Document to Query: Document: {p}"), q.to_string()),
        View::Q2p => (format!("Query: {q} Translate Query to Document:"), p.to_string()),
        View::RankStar => (
            format!("Query: {q} Document: {p} Relevant:"),
            "true".to_string(),
        ),
        View::Rank | View::RankSwap => {
            return Err(Error::Template(format!(
                "ranking view `{view}` cannot be rendered as a generation instance"
            )));
        }
    };
    Ok(T2TExample { source, target, view })
}

/// Expand one training triple into its true-labeled and false-labeled
/// ranking instances, in that order.
pub fn triple_to_rank_examples(t: &TrainTriple, swap: bool) -> Result<[T2TExample; 2]> {
    Ok([
        render_rank(&t.query_text, &t.pos_text, true, swap)?,
        render_rank(&t.query_text, &t.neg_text, false, swap)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_view_exact_bytes() {
        let ex = render_rank("what is x", "x is y", true, false).unwrap();
        assert_eq!(ex.source, "Query: what is x Document: x is y Relevant:");
        assert_eq!(ex.target, "true");
        assert_eq!(ex.view, View::Rank);
    }

    #[test]
    fn rank_view_false_target() {
        let ex = render_rank("what is x", "x is y", false, false).unwrap();
        assert_eq!(ex.target, "false");
    }

    #[test]
    fn rank_swap_moves_head_to_front() {
        let ex = render_rank("a", "b", true, true).unwrap();
        assert_eq!(ex.source, "Relevant: Query: a Document: b");
        assert_eq!(ex.target, "true");
        assert_eq!(ex.view, View::RankSwap);
    }

    #[test]
    fn p2q_exact_bytes() {
        let ex = render_generation("what is x", "x is y", View::P2q).unwrap();
        assert_eq!(ex.source, "Document: x is y Translate Document to Query:");
        assert_eq!(ex.target, "what is x");
    }

    #[test]
    fn p2q_swap_exact_bytes() {
        let ex = render_generation("what is x", "x is y", View::P2qSwap).unwrap();
        assert_eq!(ex.source, "Translate Document to Query: Document: x is y");
        assert_eq!(ex.target, "what is x");
    }

    #[test]
    fn q2p_exact_bytes() {
        let ex = render_generation("what is x", "x is y", View::Q2p).unwrap();
        assert_eq!(ex.source, "Query: what is x Translate Query to Document:");
        assert_eq!(ex.target, "x is y");
    }

    #[test]
    fn rank_star_target_is_always_true() {
        let ex = render_generation("q star", "p star", View::RankStar).unwrap();
        assert_eq!(ex.source, "Query: q star Document: p star Relevant:");
        assert_eq!(ex.target, "true");
    }

    #[test]
    fn ranking_views_rejected_by_render_generation() {
        assert!(render_generation("q", "p", View::Rank).is_err());
        assert!(render_generation("q", "p", View::RankSwap).is_err());
    }

    #[test]
    fn empty_inputs_rejected() {
        assert!(render_rank("", "p", true, false).is_err());
        assert!(render_rank("q", "", true, false).is_err());
        assert!(render_generation("", "p", View::P2q).is_err());
    }

    #[test]
    fn triple_expansion_order_and_labels() {
        let t = TrainTriple::new("q".into(), "pos text".into(), "neg text".into()).unwrap();
        let [a, b] = triple_to_rank_examples(&t, false).unwrap();
        assert_eq!(a.source, "Query: q Document: pos text Relevant:");
        assert_eq!(a.target, "true");
        assert_eq!(b.source, "Query: q Document: neg text Relevant:");
        assert_eq!(b.target, "false");
    }

    #[test]
    fn triple_expansion_propagates_swap() {
        let t = TrainTriple::new("q".into(), "p".into(), "n".into()).unwrap();
        let [a, b] = triple_to_rank_examples(&t, true).unwrap();
        assert_eq!(a.view, View::RankSwap);
        assert_eq!(b.view, View::RankSwap);
        assert!(a.source.starts_with("Relevant: "));
        assert!(b.source.starts_with("Relevant: "));
    }

    #[test]
    fn rendering_is_pure() {
        let a = render_rank("q", "p", true, false).unwrap();
        let b = render_rank("q", "p", true, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn no_double_spaces_or_trailing_space() {
        for ex in [
            render_rank("q", "p", true, false).unwrap(),
            render_rank("q", "p", true, true).unwrap(),
            render_generation("q", "p", View::P2q).unwrap(),
            render_generation("q", "p", View::P2qSwap).unwrap(),
            render_generation("q", "p", View::Q2p).unwrap(),
            render_generation("q", "p", View::RankStar).unwrap(),
        ] {
            assert!(!ex.source.contains("  "), "{}", ex.source);
            assert!(!ex.source.ends_with(' '), "{}", ex.source);
        }
    }

    #[test]
    fn view_names_roundtrip() {
        for v in View::ALL {
            assert_eq!(v.to_string().parse::<View>().unwrap(), v);
        }
        assert_eq!("rank*".parse::<View>().unwrap(), View::RankStar);
        assert!("bogus".parse::<View>().is_err());
    }
}
