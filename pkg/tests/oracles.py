"""Independent reference implementations shared by the unit and acceptance
suites. These deliberately recompute everything from scratch so they cannot
share a defect with the incremental production code."""
import random

from gazeadapt.gaze import DEFAULT_DISPLAY, GazeParams, GazeSample, SAMPLE_PERIOD_MS

P = SAMPLE_PERIOD_MS


def mk(t, x, y, lv=True, rv=True):
    return GazeSample(timestamp_ms=t, x=x, y=y, left_valid=lv, right_valid=rv)


def brute_force_fixations(samples, params=GazeParams(), bounds=DEFAULT_DISPLAY):
    """Maximal-window enumeration with from-scratch dispersion per step."""

    def usable(s):
        return (s.left_valid or s.right_valid) and bounds.contains(s.x, s.y)

    def dispersion(window):
        xs = [s.x for s in window]
        ys = [s.y for s in window]
        return (max(xs) - min(xs)) + (max(ys) - min(ys))

    out = []
    i, n = 0, len(samples)
    while i < n:
        if not usable(samples[i]):
            i += 1
            continue
        j = i
        while (
            j + 1 < n
            and usable(samples[j + 1])
            and dispersion(samples[i:j + 2]) <= params.dispersion_px
        ):
            j += 1
        if samples[j].timestamp_ms - samples[i].timestamp_ms >= params.min_fixation_ms:
            window = samples[i:j + 1]
            out.append((
                window[0].timestamp_ms,
                window[-1].timestamp_ms,
                sum(s.x for s in window) / len(window),
                sum(s.y for s in window) / len(window),
                len(window),
            ))
            i = j + 1
        else:
            i += 1
    return out


def as_tuples(fixations):
    return [
        (f.start_ms, f.end_ms, f.centroid_x, f.centroid_y, f.sample_count)
        for f in fixations
    ]


def random_trace(rng, seconds=3.0, invalid_runs=True):
    """Jumpy reading-ish trace: dwells, drifts, jumps, optional invalid runs."""
    samples = []
    t = 0.0
    x, y = rng.uniform(100, 1100), rng.uniform(100, 900)
    n = int(seconds * 1000 / P)
    i = 0
    while i < n:
        mode = rng.random()
        if invalid_runs and mode < 0.05:
            run = rng.randint(1, 15)
            for _ in range(min(run, n - i)):
                samples.append(mk(t, x, y, lv=False, rv=False))
                t += P
                i += 1
        elif mode < 0.55:
            run = rng.randint(5, 40)
            for _ in range(min(run, n - i)):
                samples.append(mk(t, x + rng.uniform(-6, 6), y + rng.uniform(-6, 6)))
                t += P
                i += 1
        elif mode < 0.8:
            run = rng.randint(3, 20)
            for _ in range(min(run, n - i)):
                x += rng.uniform(-4, 4)
                y += rng.uniform(-2, 2)
                samples.append(mk(t, x, y))
                t += P
                i += 1
        else:
            x = rng.uniform(50, 1200)
            y = rng.uniform(50, 1000)
            samples.append(mk(t, x, y))
            t += P
            i += 1
    return samples


def brute_force_bh(ps):
    """Literal step-up definition evaluated candidate by candidate."""
    m = len(ps)
    indexed = sorted(range(m), key=lambda i: ps[i])
    out = [0.0] * m
    for rank_pos, idx in enumerate(indexed, start=1):
        candidates = []
        for j_pos in range(rank_pos, m + 1):
            j_idx = indexed[j_pos - 1]
            candidates.append(min(1.0, m * ps[j_idx] / j_pos))
        out[idx] = min(candidates)
    return out
