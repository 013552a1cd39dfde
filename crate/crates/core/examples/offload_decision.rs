//! One offloading decision over LOCAL, NEAR and three edge servers, with
//! the 5G guard shown as the uplink degrades.

use ratdelay::offload::{select_node, CandidateNode, SegmentDelays, SelectionConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let nodes = vec![
        CandidateNode::local("local", 0.250, 0.99),
        CandidateNode::near("near", 0.060, 0.90),
        CandidateNode::edge("edge1", 1, 0.020, 0.97),
        CandidateNode::edge("edge2", 2, 0.015, 0.93),
        CandidateNode::edge("edge3", 3, 0.010, 0.80),
    ];
    let cfg = SelectionConfig::new(0.6, 0.08)?;

    for d_5g in [0.01, 0.05, 0.12] {
        let segments = SegmentDelays {
            d_5g,
            d_edge: vec![0.012, 0.030, 0.045],
        };
        let d = select_node(&segments, &nodes, &cfg)?;
        println!("D_5G = {d_5g:.3} s -> {} ({:.4} s)", d.selected, d.total_delay);
        for c in &d.candidates {
            println!("    {:<6} T={:.4}  S={:.4}", c.id, c.total_delay, c.score);
        }
        if d.fallback {
            println!("    uplink above {:.3} s, staying local", cfg.delta_max);
        }
    }
    Ok(())
}
