"""Build the bundled synthetic Facebook-metrics fixture.

The benchmark validates against the published summary statistics of the
public 500-post Facebook-metrics dataset, but that file cannot be
redistributed here, so this script constructs a stand-in with the same
schema (19 semicolon-delimited columns, 500 rows, a handful of missing
cells) whose comment/like/share columns reproduce every published
statistic (mean, median, mode, sample std, max, min) exactly after
rounding to integer.  Engagement counts are coupled to the
pre-publication features through smooth per-target scores plus rank
noise, so the three counters are genuinely learnable from the seven
inputs without being deterministic.

Run from the repository root:

    python scripts/make_fixture.py [out_path]

The output is committed at data/facebook_metrics_synthetic.csv; this
script only needs re-running if the construction changes.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from postbench.data import round_half_up, summary_stats  # noqa: E402

N_ROWS = 500
# 0-based data-row indices with empty cells (5 rows total, like the
# handful in the public file)
MISSING_PAID_ROWS = (111,)
MISSING_LIKE_ROWS = (240,)
MISSING_SHARE_ROWS = (240, 332, 403, 466)

HEADER = (
    "Page total likes;Type;Category;Post Month;Post Weekday;Post Hour;Paid;"
    "Lifetime Post Total Reach;Lifetime Post Total Impressions;"
    "Lifetime Engaged Users;Lifetime Post Consumers;"
    "Lifetime Post Consumptions;"
    "Lifetime Post Impressions by people who have liked your Page;"
    "Lifetime Post reach by people who like your Page;"
    "Lifetime People who have liked your Page and engaged with your post;"
    "comment;like;share;Total Interactions"
)

TARGET_SPECS = {
    # name: (n_values, mean, median, mode, std, max)
    "comment": (500, 7, 3, 0, 21, 372),
    "like": (499, 178, 101, 98, 323, 5172),
    "share": (496, 27, 19, 13, 43, 790),
}


def _counts_to_values(counts: dict[int, int]) -> list[int]:
    out = []
    for v, c in counts.items():
        out.extend([v] * c)
    return out


def _low_block(median: int, mode: int, below_count: int, at_count: int,
               mode_count: int, cap: int) -> dict[int, int]:
    """Multiset with ``below_count`` values < median, ``at_count`` at it.

    The mode gets exactly ``mode_count`` occurrences and every other
    value at most ``cap`` (< mode_count), so the mode stays strictly
    dominant.  A zero is always present (the columns all have min 0).
    """
    assert mode < median and at_count <= cap < mode_count
    counts = {mode: mode_count, median: at_count}
    slots = [v for v in range(median - 1, -1, -1) if v != mode]
    remaining = below_count - mode_count
    assert 0 < remaining <= cap * len(slots), "low block infeasible"
    per = -(-remaining // len(slots))  # ceil
    assert per <= cap
    for v in slots:
        take = min(per, remaining)
        if take:
            counts[v] = take
        remaining -= take
    if counts.get(0, 0) == 0:
        donor = max(v for v, c in counts.items() if c > 1 and v < median)
        counts[donor] -= 1
        counts[0] = 1
    return counts


def _upper_spine(vmax: int, median: int, n_upper: int, decay: float,
                 n_spine: int) -> list[int]:
    """Descending tail values in (median, vmax]; the rest fill in later."""
    spine = [vmax]
    v = vmax
    for _ in range(n_spine - 1):
        v = int(v * decay)
        if v <= median + n_upper:  # keep room for distinct filler values
            break
        spine.append(v)
    return spine


def _build_target_multiset(name: str, seed: int) -> np.ndarray:
    """Construct an integer multiset with the exact rounded statistics."""
    n, mean, median, mode, std, vmax = TARGET_SPECS[name]
    med_pos = (n - 1) // 2
    if name == "comment":
        low = _low_block(median, mode, below_count=245, at_count=46,
                         mode_count=115, cap=80)
        spine = _upper_spine(vmax, median, 60, 0.72, 10)
    elif name == "like":
        low = _low_block(median, mode, below_count=245, at_count=7,
                         mode_count=12, cap=9)
        spine = _upper_spine(vmax, median, 60, 0.62, 9)
    else:
        low = _low_block(median, mode, below_count=240, at_count=10,
                         mode_count=26, cap=20)
        spine = _upper_spine(vmax, median, 60, 0.55, 7)
    low_values = _counts_to_values(low)
    n_upper = n - len(low_values)
    n_fill = n_upper - len(spine)
    assert n_fill > 0, f"{name}: low block too large"

    # filler: geometric ramp from just above the median toward the spine
    lo, hi = median + 1, max(median + 2, int(spine[-1] * 0.9))
    ratio = (hi / lo) ** (1.0 / max(n_fill - 1, 1))
    filler = [int(round(lo * ratio ** k)) for k in range(n_fill)]
    filler = [min(max(v, lo), vmax - 1) for v in filler]

    values = np.array(sorted(low_values + filler + spine), dtype=np.int64)
    assert values.size == n and values[med_pos] == median

    _repair(values, name, seed)
    _verify(values, name)
    return values


def _stat_windows(name: str):
    n, mean, median, mode, std, vmax = TARGET_SPECS[name]
    sum_lo, sum_hi = n * (mean - 0.5) + 1e-9, n * (mean + 0.5) - 1e-9
    ss_lo = (std - 0.5) ** 2 * (n - 1) + 1e-9
    ss_hi = (std + 0.5) ** 2 * (n - 1) - 1e-9
    return sum_lo, sum_hi, ss_lo, ss_hi


def _plastic_mask(values: np.ndarray, name: str) -> np.ndarray:
    """Values free to move: strictly between the median block and the max."""
    _, _, median, mode, _, vmax = TARGET_SPECS[name]
    return (values > median + 1) & (values < vmax)


def _repair(values: np.ndarray, name: str, seed: int) -> None:
    """Nudge plastic values by +-1 until the sum and the sum of squared
    deviations both land inside their rounding windows.

    Only values strictly between the median block and the pinned maximum
    move, so min/max/median/mode never change; a multiplicity cap keeps
    the mode dominant.
    """
    n, mean, median, mode, std, vmax = TARGET_SPECS[name]
    sum_lo, sum_hi, ss_lo, ss_hi = _stat_windows(name)
    mode_count = int(np.sum(values == mode))
    cap = mode_count - 2
    rng = np.random.default_rng(seed)

    def counts_ok(v):
        return np.sum(values == v) < cap

    # phase 1: move the mean into its window (single +-1 bumps)
    for _ in range(200000):
        total = values.sum()
        if sum_lo < total < sum_hi:
            break
        step = 1 if total < sum_lo else -1
        idx = np.flatnonzero(_plastic_mask(values, name))
        i = rng.choice(idx)
        new = values[i] + step
        if median + 1 < new < vmax and counts_ok(new):
            values[i] = new
    else:
        raise RuntimeError(f"{name}: mean repair did not converge")

    # phase 2: sum-preserving pair moves to steer the squared deviations
    for _ in range(400000):
        mu = values.mean()
        ss = float(((values - mu) ** 2).sum())
        if ss_lo < ss < ss_hi:
            break
        widen = ss < ss_lo
        idx = np.flatnonzero(_plastic_mask(values, name))
        a, b = rng.choice(idx, size=2, replace=False)
        if values[a] > values[b]:
            a, b = b, a
        if widen:
            na, nb = values[a] - 1, values[b] + 1
        else:
            if values[b] - values[a] < 2:
                continue
            na, nb = values[a] + 1, values[b] - 1
        if not (median + 1 < na < vmax and median + 1 < nb < vmax):
            continue
        if counts_ok(na) and counts_ok(nb):
            values[a], values[b] = na, nb
    else:
        raise RuntimeError(f"{name}: variance repair did not converge")
    values.sort()


def _verify(values: np.ndarray, name: str) -> None:
    n, mean, median, mode, std, vmax = TARGET_SPECS[name]
    stats = summary_stats(values.astype(np.float64))
    got = (round_half_up(stats.mean), round_half_up(stats.median),
           round_half_up(stats.mode), round_half_up(stats.std_dev),
           round_half_up(stats.max), round_half_up(stats.min))
    want = (mean, median, mode, std, vmax, 0)
    assert got == want, f"{name}: stats {got} != expected {want}"
    assert values.size == n


def _standardize(x: np.ndarray) -> np.ndarray:
    return (x - x.mean()) / x.std()


def build_features(rng: np.random.Generator):
    month = np.sort(rng.integers(1, 13, N_ROWS))[::-1]  # reverse chronological
    page_likes = (81000 + (12 - month) * 4600
                  + rng.normal(0, 2200, N_ROWS)).astype(np.int64)
    page_likes = np.clip(page_likes, 80000, 140000)
    type_label = rng.choice(
        np.array(["Link", "Photo", "Status", "Video"]),
        size=N_ROWS, p=[0.045, 0.85, 0.09, 0.015],
    )
    category = rng.choice(np.array([1, 2, 3]), size=N_ROWS, p=[0.43, 0.26, 0.31])
    weekday = rng.integers(1, 8, N_ROWS)
    hour = np.clip(rng.normal(9, 5, N_ROWS).round().astype(np.int64), 1, 23)
    paid = (rng.random(N_ROWS) < 0.28).astype(np.int64)
    return page_likes, type_label, category, month, weekday, hour, paid


def build_scores(feats, rng: np.random.Generator):
    page_likes, type_label, category, month, weekday, hour, paid = feats
    z_pl = _standardize(page_likes.astype(float))
    hour_bump = np.exp(-((hour - 10.0) / 6.0) ** 2)
    seasonal = np.sin(2.0 * np.pi * (month - 1) / 12.0)
    te = {"Link": -0.6, "Photo": 0.25, "Status": 0.55, "Video": 0.9}
    type_eff = np.array([te[t] for t in type_label])
    core = (0.9 * z_pl + 1.1 * type_eff + 0.35 * (category - 2)
            + 0.5 * seasonal + 0.8 * hour_bump + 0.75 * paid)
    scores = {}
    own = {
        "comment": 0.45 * (weekday - 4) / 3.0 + 0.3 * (category - 2),
        "like": 0.35 * paid + 0.2 * seasonal,
        "share": 0.5 * type_eff + 0.25 * (weekday - 4) / 3.0,
    }
    noise_sd = {"comment": 0.38, "like": 0.33, "share": 0.36}
    for name in ("comment", "like", "share"):
        s = _standardize(core + own[name])
        scores[name] = s + noise_sd[name] * rng.normal(size=N_ROWS)
    return scores


def assign_by_rank(score: np.ndarray, present_rows: np.ndarray,
                   multiset: np.ndarray) -> dict[int, int]:
    order = present_rows[np.argsort(score[present_rows], kind="stable")]
    return {int(r): int(v) for r, v in zip(order, np.sort(multiset))}


def main(out_path: Path) -> None:
    rng = np.random.default_rng(20180523)
    feats = build_features(rng)
    page_likes, type_label, category, month, weekday, hour, paid = feats
    scores = build_scores(feats, rng)

    multisets = {name: _build_target_multiset(name, seed)
                 for seed, name in enumerate(("comment", "like", "share"), start=11)}
    present = {
        "comment": np.arange(N_ROWS),
        "like": np.setdiff1d(np.arange(N_ROWS), MISSING_LIKE_ROWS),
        "share": np.setdiff1d(np.arange(N_ROWS), MISSING_SHARE_ROWS),
    }
    assigned = {name: assign_by_rank(scores[name], present[name], multisets[name])
                for name in ("comment", "like", "share")}

    lines = [HEADER]
    for i in range(N_ROWS):
        comment = assigned["comment"][i]
        like = assigned["like"].get(i)
        share = assigned["share"].get(i)
        like_n = like if like is not None else 0
        share_n = share if share is not None else 0
        reach = int(max(120, like_n * 23 + comment * 40 + rng.normal(1600, 700)))
        impressions = int(reach * rng.uniform(1.6, 2.3))
        engaged = int(max(10, like_n * 1.1 + comment * 2.1 + share_n * 1.4
                          + rng.normal(260, 110)))
        consumers = int(max(8, engaged * rng.uniform(0.75, 0.95)))
        consumptions = int(consumers * rng.uniform(1.2, 2.1))
        impr_liked = int(impressions * rng.uniform(0.45, 0.7))
        reach_liked = int(reach * rng.uniform(0.4, 0.65))
        engaged_liked = int(engaged * rng.uniform(0.5, 0.75))
        total = comment + (like or 0) + (share or 0)
        row = [
            str(page_likes[i]), type_label[i], str(category[i]), str(month[i]),
            str(weekday[i]), str(hour[i]),
            "" if i in MISSING_PAID_ROWS else str(paid[i]),
            str(reach), str(impressions), str(engaged), str(consumers),
            str(consumptions), str(impr_liked), str(reach_liked),
            str(engaged_liked), str(comment),
            "" if like is None else str(like),
            "" if share is None else str(share),
            str(total),
        ]
        lines.append(";".join(row))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("\n".join(lines) + "\n")

    # re-read through the production reader and verify every cell
    from postbench.data import compare_reference_stats, load_raw

    raw = load_raw(out_path)
    assert raw.n_rows == N_ROWS
    rows = compare_reference_stats(raw)
    bad = [r for r in rows if not r[4]]
    assert not bad, f"reference stats mismatch: {bad}"
    print(f"wrote {out_path} ({N_ROWS} rows); all 18 reference stats match")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        REPO / "data" / "facebook_metrics_synthetic.csv")
    main(target)
