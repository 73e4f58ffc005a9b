/// Game points for a voter whose `rank`-th choice (1 = favourite) of `m`
/// cards won. Nobody earns anything without consensus.
pub fn reward(rank: usize, m: usize, converged: bool) -> u32 {
    assert!((1..=m).contains(&rank), "rank {rank} outside 1..={m}");
    if !converged {
        return 0;
    }
    let points = 100.0 * (m - rank + 1) as f64 / m as f64;
    points.round() as u32
}

/// Card values shown to a player: points per rank, best first.
pub fn value_ladder(m: usize) -> Vec<u32> {
    (1..=m).map(|r| reward(r, m, true)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_cards() {
        assert_eq!(value_ladder(5), vec![100, 80, 60, 40, 20]);
        assert_eq!(reward(1, 5, false), 0);
    }

    #[test]
    fn rounding() {
        assert_eq!(value_ladder(3), vec![100, 67, 33]);
        assert_eq!(value_ladder(6), vec![100, 83, 67, 50, 33, 17]);
        assert_eq!(value_ladder(1), vec![100]);
    }
}
