//! Two-player parity games (max-even: player 0 wins a play iff the highest
//! priority seen infinitely often is even), solved by Zielonka's recursive
//! algorithm with memoryless strategies for both players.

/// Player 0 (Even) or player 1 (Odd).
pub type Player = u8;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Arena {
    pub owner: Vec<Player>,
    pub priority: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
}

impl Arena {
    pub fn add_vertex(&mut self, owner: Player, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if !self.succ[u].contains(&v) {
            self.succ[u].push(v);
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    /// Vertices without successors lose for their owner; they get a
    /// self-loop whose priority has the opponent's parity.
    pub fn close_dead_ends(&mut self) {
        for v in 0..self.len() {
            if self.succ[v].is_empty() {
                self.succ[v].push(v);
                self.priority[v] = if self.owner[v] == 0 { 1 } else { 0 };
            }
        }
    }
}

/// Winner of every vertex and, for each vertex, the successor its owner
/// plays when it is the winner there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub winner: Vec<Player>,
    pub strategy: Vec<Option<usize>>,
}

impl Solution {
    pub fn region(&self, player: Player) -> Vec<usize> {
        (0..self.winner.len()).filter(|&v| self.winner[v] == player).collect()
    }
}

/// Solves a game whose every vertex has a successor.
pub fn solve_parity_game(arena: &Arena) -> Solution {
    assert!(arena.succ.iter().all(|s| !s.is_empty()), "arena has a dead end");
    let n = arena.len();
    let pred = predecessors(arena);
    let mut winner = vec![0; n];
    let mut strategy = vec![None; n];
    let all = vec![true; n];
    zielonka(arena, &pred, &all, &mut winner, &mut strategy);
    Solution { winner, strategy }
}

fn predecessors(arena: &Arena) -> Vec<Vec<usize>> {
    let mut pred = vec![Vec::new(); arena.len()];
    for (u, vs) in arena.succ.iter().enumerate() {
        for &v in vs {
            pred[v].push(u);
        }
    }
    pred
}

/// Attractor of `player` to `target` inside `within`. Records attracting
/// moves for `player`'s vertices in `strategy`.
fn attractor(
    arena: &Arena,
    pred: &[Vec<usize>],
    within: &[bool],
    target: &[bool],
    player: Player,
    strategy: &mut [Option<usize>],
) -> Vec<bool> {
    let n = arena.len();
    let mut attr = target.to_vec();
    let mut count: Vec<usize> = (0..n)
        .map(|v| {
            if within[v] {
                arena.succ[v].iter().filter(|&&w| within[w]).count()
            } else {
                0
            }
        })
        .collect();
    let mut queue: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
    while let Some(w) = queue.pop() {
        for &u in &pred[w] {
            if !within[u] || attr[u] {
                continue;
            }
            if arena.owner[u] == player {
                attr[u] = true;
                strategy[u] = Some(w);
                queue.push(u);
            } else {
                count[u] -= 1;
                if count[u] == 0 {
                    attr[u] = true;
                    queue.push(u);
                }
            }
        }
    }
    attr
}

fn zielonka(
    arena: &Arena,
    pred: &[Vec<usize>],
    within: &[bool],
    winner: &mut [Player],
    strategy: &mut [Option<usize>],
) {
    let n = arena.len();
    let Some(d) = (0..n).filter(|&v| within[v]).map(|v| arena.priority[v]).max() else {
        return;
    };
    let i = (d % 2) as Player;
    let top: Vec<bool> = (0..n).map(|v| within[v] && arena.priority[v] == d).collect();
    let mut attr_strategy = vec![None; n];
    let a = attractor(arena, pred, within, &top, i, &mut attr_strategy);
    let rest: Vec<bool> = (0..n).map(|v| within[v] && !a[v]).collect();
    zielonka(arena, pred, &rest, winner, strategy);
    let opponent_region: Vec<bool> = (0..n).map(|v| rest[v] && winner[v] != i).collect();
    if !opponent_region.iter().any(|&b| b) {
        for v in (0..n).filter(|&v| a[v]) {
            winner[v] = i;
            if arena.owner[v] == i {
                strategy[v] = if top[v] {
                    arena.succ[v].iter().copied().find(|&w| within[w])
                } else {
                    attr_strategy[v]
                };
            }
        }
        return;
    }
    let mut b_strategy = vec![None; n];
    let b = attractor(arena, pred, within, &opponent_region, 1 - i, &mut b_strategy);
    for v in (0..n).filter(|&v| b[v]) {
        winner[v] = 1 - i;
        if !opponent_region[v] && arena.owner[v] == 1 - i {
            strategy[v] = b_strategy[v];
        }
    }
    let remaining: Vec<bool> = (0..n).map(|v| within[v] && !b[v]).collect();
    zielonka(arena, pred, &remaining, winner, strategy);
}

/// Solves a Büchi game: player 0 wins a play iff it visits `accepting`
/// infinitely often. Every vertex must have a successor.
pub fn solve_buchi_game(arena: &Arena, accepting: &[bool]) -> Solution {
    assert!(arena.succ.iter().all(|s| !s.is_empty()), "arena has a dead end");
    let n = arena.len();
    let pred = predecessors(arena);
    let mut within = vec![true; n];
    let mut strategy = vec![None; n];
    loop {
        let target: Vec<bool> = (0..n).map(|v| within[v] && accepting[v]).collect();
        let mut attr_strategy = vec![None; n];
        let reach = attractor(arena, &pred, &within, &target, 0, &mut attr_strategy);
        let trap: Vec<bool> = (0..n).map(|v| within[v] && !reach[v]).collect();
        if !trap.iter().any(|&b| b) {
            for v in (0..n).filter(|&v| within[v] && arena.owner[v] == 0) {
                strategy[v] = if target[v] {
                    arena.succ[v].iter().copied().find(|&w| within[w])
                } else {
                    attr_strategy[v]
                };
            }
            break;
        }
        let mut lose_strategy = vec![None; n];
        let lost = attractor(arena, &pred, &within, &trap, 1, &mut lose_strategy);
        for v in (0..n).filter(|&v| lost[v]) {
            within[v] = false;
            if arena.owner[v] == 1 {
                strategy[v] = lose_strategy[v].or_else(|| arena.succ[v].iter().copied().find(|&w| trap[w]));
            }
        }
    }
    Solution {
        winner: within.iter().map(|&w| if w { 0 } else { 1 }).collect(),
        strategy,
    }
}

/// Checks that `solution` is consistent: strategies stay in the winner's
/// region and every cycle the opponent can force in the restricted graph
/// has the winner's parity. Meant for tests on small arenas.
pub fn check_solution(arena: &Arena, solution: &Solution) -> bool {
    for player in 0..2u8 {
        let region: Vec<bool> = (0..arena.len()).map(|v| solution.winner[v] == player).collect();
        // Restricted graph: winner's vertices follow the strategy.
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); arena.len()];
        for v in (0..arena.len()).filter(|&v| region[v]) {
            if arena.owner[v] == player {
                match solution.strategy[v] {
                    Some(w) if region[w] && arena.succ[v].contains(&w) => succ[v].push(w),
                    _ => return false,
                }
            } else {
                for &w in &arena.succ[v] {
                    if !region[w] {
                        return false;
                    }
                    succ[v].push(w);
                }
            }
        }
        // Any cycle whose maximum has the opponent's parity refutes the strategy:
        // look for one through each vertex of the opponent's parity, using
        // only vertices of priority at most its own.
        for v in (0..arena.len()).filter(|&v| region[v] && arena.priority[v] % 2 != player as u32) {
            let bound = arena.priority[v];
            let mut seen = vec![false; arena.len()];
            let mut stack: Vec<usize> = succ[v]
                .iter()
                .copied()
                .filter(|&w| arena.priority[w] <= bound)
                .collect();
            while let Some(u) = stack.pop() {
                if u == v {
                    return false;
                }
                if seen[u] {
                    continue;
                }
                seen[u] = true;
                stack.extend(succ[u].iter().copied().filter(|&w| arena.priority[w] <= bound));
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arena(spec: &[(Player, u32, &[usize])]) -> Arena {
        Arena {
            owner: spec.iter().map(|s| s.0).collect(),
            priority: spec.iter().map(|s| s.1).collect(),
            succ: spec.iter().map(|s| s.2.to_vec()).collect(),
        }
    }

    #[test]
    fn single_vertex_games() {
        let even = arena(&[(1, 2, &[0])]);
        assert_eq!(solve_parity_game(&even).winner, vec![0]);
        let odd = arena(&[(0, 1, &[0])]);
        assert_eq!(solve_parity_game(&odd).winner, vec![1]);
    }

    #[test]
    fn choice_between_cycles() {
        // 0 (player 0) may go to an odd loop (1) or an even loop (2).
        let g = arena(&[(0, 0, &[1, 2]), (0, 1, &[1]), (0, 2, &[2])]);
        let s = solve_parity_game(&g);
        assert_eq!(s.winner, vec![0, 1, 0]);
        assert_eq!(s.strategy[0], Some(2));
        assert!(check_solution(&g, &s));
    }

    #[test]
    fn opponent_escapes() {
        // Player 1 at 0 chooses between an even loop and an odd loop.
        let g = arena(&[(1, 0, &[1, 2]), (0, 3, &[1]), (0, 2, &[2])]);
        let s = solve_parity_game(&g);
        assert_eq!(s.winner[0], 1);
        assert_eq!(s.strategy[0], Some(1));
        assert!(check_solution(&g, &s));
    }

    #[test]
    fn buchi_game_matches_parity_encoding() {
        let g = arena(&[(0, 0, &[1, 2]), (1, 0, &[0, 3]), (0, 0, &[2]), (0, 0, &[3, 0])]);
        let acc = [false, false, true, false];
        let b = solve_buchi_game(&g, &acc);
        let mut p = g.clone();
        p.priority = acc.iter().map(|&a| if a { 2 } else { 1 }).collect();
        let z = solve_parity_game(&p);
        assert_eq!(b.winner, z.winner);
        assert!(check_solution(&p, &b));
    }

    #[test]
    fn dead_ends_lose() {
        let mut g = arena(&[(0, 2, &[]), (1, 2, &[])]);
        g.close_dead_ends();
        assert_eq!(solve_parity_game(&g).winner, vec![1, 0]);
    }
}
