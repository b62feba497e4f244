"""Column raycaster for the fixed-heading camera.

One ray per pixel column over a 90 degree field of view. Walls are one tile
high with the eye at half height; the lower half of the screen is floor-cast
so floor tiles (including lava, webs and the goal) are visible too. All
textures are smooth functions of world coordinates, so the image varies
continuously with the camera position. The only exception is the
``REPETITIVE`` wall texture, whose stripes repeat every half tile.
"""

import math

import numpy as np

from .world import FRAME_HEIGHT, FRAME_WIDTH, REPETITIVE, TileKind

FOCAL = FRAME_WIDTH / 2
EYE_HEIGHT = 0.5
SHADING = 0.15
SIDE_DARKEN = 0.8
WEB_DARKEN = 0.3
WEB_OCCLUDED_FRACTION = 0.4
_FAINT = 9
_N_WAVES = 4


class Texture:
    """Sum of plane waves ``base + amp * sum_k w_k sin(f_k (a cos t_k + b sin t_k) + p_k)``."""

    def __init__(self, tid, base, amp):
        rng = np.random.default_rng(7919 + tid)
        self.freq = rng.uniform(1.3, 3.3, _N_WAVES)
        theta = rng.uniform(0, np.pi, _N_WAVES)
        self.cos, self.sin = np.cos(theta), np.sin(theta)
        self.phase = rng.uniform(0, 2 * np.pi, _N_WAVES)
        w = rng.uniform(0.5, 1.0, _N_WAVES)
        self.weight = w / w.sum()
        self.base, self.amp = base, amp

    def __call__(self, a, b):
        out = np.full(np.shape(a), self.base)
        for k in range(_N_WAVES):
            out += self.amp * self.weight[k] * np.sin(
                self.freq[k] * (a * self.cos[k] + b * self.sin[k]) + self.phase[k])
        return out


FLOOR_TEXTURES = {t: Texture(t, 0.45, 0.35 if t != _FAINT else 0.04) for t in range(10)}
WALL_TEXTURES = {t: Texture(100 + t, 0.6, 0.3 if t != _FAINT else 0.04) for t in range(10)}


def _repetitive(u, v):
    return 0.55 + 0.3 * np.sin(4 * np.pi * u) + 0.1 * np.sin(4 * np.pi * v)


def _occlusion_mask():
    rng = np.random.default_rng(4242)
    field = rng.normal(size=(FRAME_HEIGHT, FRAME_WIDTH))
    # smooth so the mask forms blotches rather than salt-and-pepper
    for axis in (0, 1):
        field = (np.roll(field, 1, axis) + field + np.roll(field, -1, axis)) / 3
    k = int(round(WEB_OCCLUDED_FRACTION * field.size))
    mask = np.zeros(field.size, bool)
    mask[np.argsort(field, axis=None, kind="stable")[:k]] = True
    return mask.reshape(field.shape)


OCCLUSION_MASK = _occlusion_mask()

_cols = (2 * (np.arange(FRAME_WIDTH) + 0.5) / FRAME_WIDTH) - 1
# heading +x; screen-left looks towards +y
RAY_DY = -_cols
_rows = np.arange(FRAME_HEIGHT) + 0.5 - FRAME_HEIGHT / 2
SKY = np.clip(0.9 - 0.25 * (np.arange(FRAME_HEIGHT) / (FRAME_HEIGHT / 2)), 0, 1)


def _cast(kinds, px, py):
    """Vectorised DDA; returns perpendicular distance, side, hit cell and texture u."""
    n = FRAME_WIDTH
    map_x = np.full(n, math.floor(px))
    map_y = np.full(n, math.floor(py))
    delta_y = np.abs(1.0 / RAY_DY)
    step_y = np.where(RAY_DY < 0, -1, 1)
    side_x = (map_x + 1 - px).astype(float)
    side_y = np.where(RAY_DY < 0, (py - map_y) * delta_y, (map_y + 1 - py) * delta_y)
    side = np.zeros(n, dtype=np.int8)
    active = np.ones(n, bool)
    h, w = kinds.shape
    while active.any():
        idx = np.nonzero(active)[0]
        go_x = side_x[idx] < side_y[idx]
        ix, iy = idx[go_x], idx[~go_x]
        map_x[ix] += 1
        side_x[ix] += 1.0
        side[ix] = 0
        map_y[iy] += step_y[iy]
        side_y[iy] += delta_y[iy]
        side[iy] = 1
        mx = np.clip(map_x[idx], 0, w - 1)
        my = np.clip(map_y[idx], 0, h - 1)
        hit = (kinds[my, mx] == TileKind.WALL) | (map_x[idx] != mx) | (map_y[idx] != my)
        active[idx[hit]] = False
    perp = np.where(side == 0, side_x - 1.0, side_y - delta_y)
    u = np.where(side == 0, py + perp * RAY_DY, px + perp)
    return perp, side, map_x, map_y, u


def _floor_values(m, wx, wy):
    kx = np.clip(np.floor(wx).astype(int), 0, m.width - 1)
    ky = np.clip(np.floor(wy).astype(int), 0, m.height - 1)
    kind = m.kinds[ky, kx]
    tex = m.textures[ky, kx]
    out = np.empty(wx.shape)
    for t in np.unique(tex[kind == TileKind.FLOOR]):
        sel = (kind == TileKind.FLOOR) & (tex == t)
        out[sel] = FLOOR_TEXTURES[int(t)](wx[sel], wy[sel])
    sel = kind == TileKind.LAVA
    out[sel] = 0.04
    sel = kind == TileKind.WEB
    out[sel] = 0.8 + 0.1 * np.sin(2.3 * wx[sel] + 1.7 * wy[sel])
    sel = kind == TileKind.GOAL
    checker = (np.floor(4 * wx[sel]) + np.floor(4 * wy[sel])) % 2
    out[sel] = 0.05 + 0.9 * checker
    sel = kind == TileKind.WALL
    out[sel] = 0.5
    return out


def _render(m, px, py):
    perp, side, hit_x, hit_y, u = _cast(m.kinds, px, py)
    H, W = FRAME_HEIGHT, FRAME_WIDTH
    frame = np.repeat(SKY[:, None], W, axis=1)

    # wall: world height of the point seen by each pixel row
    height = EYE_HEIGHT - _rows[:, None] * perp[None, :] / FOCAL
    is_wall = (height >= 0) & (height <= 1)
    hx = np.clip(hit_x, 0, m.width - 1)
    hy = np.clip(hit_y, 0, m.height - 1)
    tex = m.textures[hy, hx]
    face = np.where(side == 0, hit_x, hit_y)
    wall = np.empty((H, W))
    for t in np.unique(tex):
        cols = tex == t
        uu = np.broadcast_to(u[cols], (H, cols.sum()))
        vv = height[:, cols]
        if t == REPETITIVE:
            wall[:, cols] = _repetitive(uu, vv)
        else:
            wall[:, cols] = WALL_TEXTURES[int(t)](uu, vv + 3.1 * face[cols])
    wall *= np.where(side == 0, 1.0, SIDE_DARKEN)[None, :]
    wall /= 1.0 + SHADING * perp[None, :]
    frame[is_wall] = wall[is_wall]

    # floor below the wall's foot
    below = _rows > 0
    d_row = EYE_HEIGHT * FOCAL / _rows[below]
    is_floor = np.zeros((H, W), bool)
    is_floor[below] = d_row[:, None] < perp[None, :]
    rr, cc = np.nonzero(is_floor)
    d = EYE_HEIGHT * FOCAL / _rows[rr]
    wx = px + d
    wy = py + d * RAY_DY[cc]
    vals = _floor_values(m, wx, wy)
    # far floor fades to its mean to limit aliasing
    fade = 1.0 / (1.0 + (d / 5.0) ** 2)
    vals = 0.45 + (vals - 0.45) * fade
    frame[rr, cc] = vals / (1.0 + SHADING * d)

    if m.tile(px, py) == TileKind.WEB:
        frame[OCCLUSION_MASK] *= WEB_DARKEN
    return np.clip(frame, 0.0, 1.0)


def render_clean(m, pos):
    """Noise-free frame at ``pos``; cached per map since it depends only on (map, pos)."""
    key = (round(float(pos[0]), 12), round(float(pos[1]), 12))
    cache = m._render_cache
    frame = cache.get(key)
    if frame is None:
        frame = _render(m, float(pos[0]), float(pos[1]))
        frame.setflags(write=False)
        if len(cache) > 50000:
            cache.clear()
        cache[key] = frame
    return frame.copy()
