use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::ROBOT_SIZE_M;
use crate::vision::{Grating, Scene, Surface};

use super::geom::{Rect, Segment};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("obstacle density {0}% outside the supported 0..=38% range")]
    BadDensity(f64),

    #[error("could not place obstacle {placed} of {want} after {attempts} attempts (density {density}%)")]
    PlacementInfeasible {
        placed: usize,
        want: usize,
        attempts: usize,
        density: f64,
    },

    #[error("invalid environment parameter: {0}")]
    BadParameter(String),
}

/// Obstacle block: axis-aligned, half-extents in meters. Free-standing
/// obstacles are 1 x 1 m; thin blocks model the gap-arena divider wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub cx: f64,
    pub cy: f64,
    pub hx: f64,
    pub hy: f64,
}

/// What counts as leaving the environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExitRule {
    /// No exit; episodes end on collision or timeout.
    None,
    /// Centre of mass crosses x > threshold (corridor far end).
    BeyondX(f64),
    /// Centre of mass crosses x < threshold (narrowing corridor entry).
    BeforeX(f64),
}

/// A gap in the divider wall of the gap arena.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapSpec {
    pub fixed: bool,
    pub y_min: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvKind {
    Clutter { density_pct: f64 },
    Corridor { width_au: f64 },
    GapArena { w_var_au: f64 },
    EmptyBox,
    NarrowingCorridor,
}

/// Texture and geometry constants shared by the generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldConfig {
    pub grating_period_m: f64,
    pub grating_bright: f32,
    pub grating_dark: f32,
    /// Clutter / empty-box arena side, meters (40 au).
    pub arena_side_m: f64,
    /// Corridor length, meters (40 au).
    pub corridor_len_m: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            grating_period_m: 0.25,
            grating_bright: 0.9,
            grating_dark: 0.1,
            arena_side_m: 16.0,
            corridor_len_m: 16.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub kind: EnvKind,
    pub arena: Rect,
    pub blocks: Vec<Block>,
    /// Solid walls (textured and collidable), including slanted ones.
    pub walls: Vec<Segment>,
    pub start: (f64, f64, f64),
    pub exit: ExitRule,
    pub gaps: Vec<GapSpec>,
    pub world: WorldConfig,
    pub seed: u64,
}

impl Environment {
    /// Renderable scene: every wall and every block face carries a vertical
    /// square-wave grating; phases derive from the environment seed.
    pub fn scene(&self) -> Scene {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5CEE_5CEE_5CEE_5CEE);
        let mut surfaces = Vec::new();
        let mut push = |seg: Segment, rng: &mut ChaCha8Rng, w: &WorldConfig| {
            surfaces.push(Surface {
                ax: seg.ax,
                ay: seg.ay,
                bx: seg.bx,
                by: seg.by,
                grating: Grating {
                    period_m: w.grating_period_m,
                    phase: rng.gen::<f64>(),
                    bright: w.grating_bright,
                    dark: w.grating_dark,
                },
            });
        };
        for wseg in &self.walls {
            push(*wseg, &mut rng, &self.world);
        }
        for b in &self.blocks {
            let (x0, x1) = (b.cx - b.hx, b.cx + b.hx);
            let (y0, y1) = (b.cy - b.hy, b.cy + b.hy);
            for seg in [
                Segment { ax: x0, ay: y0, bx: x1, by: y0 },
                Segment { ax: x1, ay: y0, bx: x1, by: y1 },
                Segment { ax: x1, ay: y1, bx: x0, by: y1 },
                Segment { ax: x0, ay: y1, bx: x0, by: y0 },
            ] {
                push(seg, &mut rng, &self.world);
            }
        }
        let mut scene = Scene::default();
        scene.surfaces = surfaces;
        scene.build_index();
        scene
    }

    /// Environment CSV: arena bounds then one row per obstacle block.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "record,cx_m,cy_m,hx_m,hy_m")?;
        writeln!(
            w,
            "arena,{},{},{},{}",
            (self.arena.min_x + self.arena.max_x) / 2.0,
            (self.arena.min_y + self.arena.max_y) / 2.0,
            self.arena.width() / 2.0,
            self.arena.height() / 2.0
        )?;
        for b in &self.blocks {
            writeln!(w, "obstacle,{},{},{},{}", b.cx, b.cy, b.hx, b.hy)?;
        }
        Ok(())
    }
}

fn rect_walls(r: &Rect) -> [Segment; 4] {
    [
        Segment { ax: r.min_x, ay: r.min_y, bx: r.max_x, by: r.min_y },
        Segment { ax: r.max_x, ay: r.min_y, bx: r.max_x, by: r.max_y },
        Segment { ax: r.max_x, ay: r.max_y, bx: r.min_x, by: r.max_y },
        Segment { ax: r.min_x, ay: r.max_y, bx: r.min_x, by: r.min_y },
    ]
}

const OBSTACLE_HALF_M: f64 = 0.5;
const START_CLEAR_RADIUS_M: f64 = 2.0;

/// Deterministic environment generation.
pub fn generate_environment(
    kind: EnvKind,
    seed: u64,
    world: WorldConfig,
) -> Result<Environment, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        EnvKind::Clutter { density_pct } => {
            if !(0.0..=38.0).contains(&density_pct) {
                return Err(WorldError::BadDensity(density_pct));
            }
            let side = world.arena_side_m;
            let arena = Rect { min_x: -side / 2.0, min_y: -side / 2.0, max_x: side / 2.0, max_y: side / 2.0 };
            let want = (density_pct / 100.0 * arena.area()).round() as usize;
            let mut blocks: Vec<Block> = Vec::with_capacity(want);
            let margin = side / 2.0 - OBSTACLE_HALF_M;
            while blocks.len() < want {
                let mut attempts = 0;
                loop {
                    attempts += 1;
                    if attempts > 1000 {
                        return Err(WorldError::PlacementInfeasible {
                            placed: blocks.len(),
                            want,
                            attempts,
                            density: density_pct,
                        });
                    }
                    let cx = rng.gen_range(-margin..margin);
                    let cy = rng.gen_range(-margin..margin);
                    if (cx * cx + cy * cy).sqrt() < START_CLEAR_RADIUS_M {
                        continue;
                    }
                    let overlaps = blocks
                        .iter()
                        .any(|b| (b.cx - cx).abs() < 1.0 && (b.cy - cy).abs() < 1.0);
                    if overlaps {
                        continue;
                    }
                    blocks.push(Block { cx, cy, hx: OBSTACLE_HALF_M, hy: OBSTACLE_HALF_M });
                    break;
                }
            }
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            Ok(Environment {
                kind,
                arena,
                blocks,
                walls: rect_walls(&arena).to_vec(),
                start: (0.0, 0.0, heading),
                exit: ExitRule::None,
                gaps: vec![],
                world,
                seed,
            })
        }
        EnvKind::EmptyBox => {
            let side = world.arena_side_m;
            let arena = Rect { min_x: -side / 2.0, min_y: -side / 2.0, max_x: side / 2.0, max_y: side / 2.0 };
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            Ok(Environment {
                kind,
                arena,
                blocks: vec![],
                walls: rect_walls(&arena).to_vec(),
                start: (0.0, 0.0, heading),
                exit: ExitRule::None,
                gaps: vec![],
                world,
                seed,
            })
        }
        EnvKind::Corridor { width_au } => {
            if width_au <= 1.0 {
                return Err(WorldError::BadParameter(format!(
                    "corridor width {width_au} au too narrow"
                )));
            }
            let w = width_au * ROBOT_SIZE_M;
            let len = world.corridor_len_m;
            let arena = Rect { min_x: 0.0, min_y: -w / 2.0, max_x: len, max_y: w / 2.0 };
            // Far end open: exit by crossing it. Back wall closed.
            let walls = vec![
                Segment { ax: 0.0, ay: -w / 2.0, bx: len, by: -w / 2.0 },
                Segment { ax: 0.0, ay: w / 2.0, bx: len, by: w / 2.0 },
                Segment { ax: 0.0, ay: -w / 2.0, bx: 0.0, by: w / 2.0 },
            ];
            Ok(Environment {
                kind,
                arena,
                blocks: vec![],
                walls,
                start: (0.8, 0.0, 0.0),
                exit: ExitRule::BeyondX(len),
                gaps: vec![],
                world,
                seed,
            })
        }
        EnvKind::GapArena { w_var_au } => {
            if !(1.0..=20.0).contains(&w_var_au) {
                return Err(WorldError::BadParameter(format!(
                    "variable gap width {w_var_au} au out of range"
                )));
            }
            // Two 24 x 30 au chambers joined by a divider with a fixed 10 au
            // gap and a variable gap.
            let (len, height) = (19.2, 12.0);
            let arena = Rect { min_x: 0.0, min_y: 0.0, max_x: len, max_y: height };
            let divider_x = len / 2.0;
            let w_var = w_var_au * ROBOT_SIZE_M;
            let w_fix = 10.0 * ROBOT_SIZE_M;
            let var_centre = 3.2;
            let fix_centre = 8.8;
            let gaps = vec![
                GapSpec { fixed: false, y_min: var_centre - w_var / 2.0, y_max: var_centre + w_var / 2.0 },
                GapSpec { fixed: true, y_min: fix_centre - w_fix / 2.0, y_max: fix_centre + w_fix / 2.0 },
            ];
            let ht = 0.1; // divider half thickness
            let mut blocks = Vec::new();
            let mut wall_piece = |y0: f64, y1: f64| {
                if y1 - y0 > 1e-9 {
                    blocks.push(Block {
                        cx: divider_x,
                        cy: (y0 + y1) / 2.0,
                        hx: ht,
                        hy: (y1 - y0) / 2.0,
                    });
                }
            };
            wall_piece(0.0, gaps[0].y_min);
            wall_piece(gaps[0].y_max, gaps[1].y_min);
            wall_piece(gaps[1].y_max, height);
            let heading = rng.gen_range(0.0..std::f64::consts::TAU);
            Ok(Environment {
                kind,
                arena,
                blocks,
                walls: rect_walls(&arena).to_vec(),
                start: (len / 4.0, height / 2.0, heading),
                exit: ExitRule::None,
                gaps,
                world,
                seed,
            })
        }
        EnvKind::NarrowingCorridor => {
            // Tapers from 20 au to 2 au over 40 au of length; entry open.
            let len = world.corridor_len_m;
            let w0 = 20.0 * ROBOT_SIZE_M / 2.0;
            let w1 = 2.0 * ROBOT_SIZE_M / 2.0;
            let arena = Rect { min_x: 0.0, min_y: -w0, max_x: len, max_y: w0 };
            let walls = vec![
                Segment { ax: 0.0, ay: -w0, bx: len, by: -w1 },
                Segment { ax: 0.0, ay: w0, bx: len, by: w1 },
                Segment { ax: len, ay: -w1, bx: len, by: w1 },
            ];
            Ok(Environment {
                kind,
                arena,
                blocks: vec![],
                walls,
                start: (0.8, 0.0, 0.0),
                exit: ExitRule::BeforeX(0.0),
                gaps: vec![],
                world,
                seed,
            })
        }
    }
}

/// Obstacle density by rasterisation at 100 px/m: the fraction of arena
/// cells covered by obstacle blocks, in percent.
pub fn obstacle_density(env: &Environment) -> f64 {
    const RES: f64 = 100.0;
    let nx = (env.arena.width() * RES).round() as usize;
    let ny = (env.arena.height() * RES).round() as usize;
    if nx == 0 || ny == 0 {
        return 0.0;
    }
    let mut grid = vec![false; nx * ny];
    for b in &env.blocks {
        let x0 = (((b.cx - b.hx) - env.arena.min_x) * RES).floor().max(0.0) as usize;
        let x1 = ((((b.cx + b.hx) - env.arena.min_x) * RES).ceil() as usize).min(nx);
        let y0 = (((b.cy - b.hy) - env.arena.min_y) * RES).floor().max(0.0) as usize;
        let y1 = ((((b.cy + b.hy) - env.arena.min_y) * RES).ceil() as usize).min(ny);
        for y in y0..y1 {
            let cy = env.arena.min_y + (y as f64 + 0.5) / RES;
            for x in x0..x1 {
                let cx = env.arena.min_x + (x as f64 + 0.5) / RES;
                if (cx - b.cx).abs() <= b.hx && (cy - b.cy).abs() <= b.hy {
                    grid[y * nx + x] = true;
                }
            }
        }
    }
    grid.iter().filter(|&&v| v).count() as f64 / (nx * ny) as f64 * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_arena_has_zero_density() {
        let env = generate_environment(EnvKind::EmptyBox, 7, WorldConfig::default()).unwrap();
        assert_eq!(obstacle_density(&env), 0.0);
    }

    #[test]
    fn single_obstacle_in_ten_by_ten_is_one_percent() {
        let mut env = generate_environment(EnvKind::EmptyBox, 7, WorldConfig {
            arena_side_m: 10.0,
            ..WorldConfig::default()
        })
        .unwrap();
        env.blocks.push(Block { cx: 2.0, cy: 2.0, hx: 0.5, hy: 0.5 });
        let d = obstacle_density(&env);
        assert!((d - 1.0).abs() < 0.1, "density {d}");
    }

    #[test]
    fn clutter_generation_hits_target_density() {
        for target in [5.0, 20.0, 38.0] {
            let env = generate_environment(
                EnvKind::Clutter { density_pct: target },
                42,
                WorldConfig::default(),
            )
            .unwrap();
            let d = obstacle_density(&env);
            assert!((d - target).abs() <= 2.0, "target {target} got {d}");
            for b in &env.blocks {
                assert!((b.cx * b.cx + b.cy * b.cy).sqrt() >= 2.0, "obstacle near start");
            }
        }
    }

    #[test]
    fn clutter_zero_is_obstacle_free() {
        let env =
            generate_environment(EnvKind::Clutter { density_pct: 0.0 }, 1, WorldConfig::default())
                .unwrap();
        assert!(env.blocks.is_empty());
    }

    #[test]
    fn clutter_is_deterministic_per_seed() {
        let mk = || {
            generate_environment(
                EnvKind::Clutter { density_pct: 15.0 },
                9,
                WorldConfig::default(),
            )
            .unwrap()
        };
        assert_eq!(mk().blocks, mk().blocks);
    }

    #[test]
    fn corridor_wall_separation() {
        let env = generate_environment(
            EnvKind::Corridor { width_au: 15.0 },
            1,
            WorldConfig::default(),
        )
        .unwrap();
        assert!((env.arena.height() - 6.0).abs() < 1e-12);
        assert_eq!(env.walls.len(), 3);
    }

    #[test]
    fn gap_arena_opening_widths() {
        let env = generate_environment(
            EnvKind::GapArena { w_var_au: 5.0 },
            1,
            WorldConfig::default(),
        )
        .unwrap();
        let var = env.gaps.iter().find(|g| !g.fixed).unwrap();
        let fix = env.gaps.iter().find(|g| g.fixed).unwrap();
        assert!((var.y_max - var.y_min - 2.0).abs() < 1e-12);
        assert!((fix.y_max - fix.y_min - 4.0).abs() < 1e-12);
        // Divider pieces plus outer walls exist and don't overlap the gaps.
        assert_eq!(env.blocks.len(), 3);
    }

    #[test]
    fn density_out_of_range_rejected() {
        assert!(matches!(
            generate_environment(EnvKind::Clutter { density_pct: 50.0 }, 1, WorldConfig::default()),
            Err(WorldError::BadDensity(_))
        ));
    }
}
