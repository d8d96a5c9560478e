"""Deterministic file output: atomic CSV/JSON writers, run manifests, and a
minimal static SVG line plot.

All writers are byte-deterministic for identical inputs (no timestamps, no
environment-dependent formatting) and atomic (temp file in the target
directory, then rename).
"""

import json
import os
import tempfile


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temp file + rename."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, columns, rows):
    """Comma-separated table with a header row; floats use repr (round-trip)."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(c) for c in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, obj):
    """Sorted-keys JSON with stable separators."""
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True,
                                       allow_nan=True) + "\n")


def build_manifest(command, seed, out_format, config_echo, outputs, version):
    """Run manifest accompanying every CLI output set."""
    return {
        "tool": "nvtrap",
        "version": version,
        "command": command,
        "seed": seed,
        "format": out_format,
        "config": config_echo,
        "outputs": sorted(outputs),
    }


def _ticks(lo, hi, n=5):
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return [lo + span * i / (n - 1) for i in range(n)]


def svg_line_plot(x, y, xlabel, ylabel, title, width=640, height=440):
    """Static line-and-points plot as an SVG string. No interactivity."""
    pairs = [(float(a), float(b)) for a, b in zip(x, y)
             if a is not None and b is not None]
    margin_l, margin_r, margin_t, margin_b = 70, 20, 40, 50
    pw = width - margin_l - margin_r
    ph = height - margin_t - margin_b

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
    ]

    if pairs:
        xs = [p[0] for p in pairs]
        ys = [p[1] for p in pairs]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_hi == x_lo:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
        if y_hi == y_lo:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
        y_pad = 0.06 * (y_hi - y_lo)
        y_lo, y_hi = y_lo - y_pad, y_hi + y_pad

        def px(v):
            return margin_l + (v - x_lo) / (x_hi - x_lo) * pw

        def py(v):
            return margin_t + ph - (v - y_lo) / (y_hi - y_lo) * ph

        for tv in _ticks(x_lo, x_hi):
            xx = px(tv)
            parts.append(f'<line x1="{xx:.2f}" y1="{margin_t + ph}" '
                         f'x2="{xx:.2f}" y2="{margin_t + ph + 5}" stroke="black"/>')
            parts.append(f'<text x="{xx:.2f}" y="{margin_t + ph + 20}" '
                         f'text-anchor="middle" font-family="sans-serif" '
                         f'font-size="11">{tv:.4g}</text>')
        for tv in _ticks(y_lo, y_hi):
            yy = py(tv)
            parts.append(f'<line x1="{margin_l - 5}" y1="{yy:.2f}" '
                         f'x2="{margin_l}" y2="{yy:.2f}" stroke="black"/>')
            parts.append(f'<text x="{margin_l - 8}" y="{yy + 4:.2f}" '
                         f'text-anchor="end" font-family="sans-serif" '
                         f'font-size="11">{tv:.4g}</text>')

        points = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in pairs)
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="#1f6fb2" stroke-width="1.5"/>')
        for a, b in pairs:
            parts.append(f'<circle cx="{px(a):.2f}" cy="{py(b):.2f}" r="3" '
                         f'fill="#1f6fb2"/>')

    parts.append(f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" '
                 f'y2="{margin_t + ph}" stroke="black"/>')
    parts.append(f'<line x1="{margin_l}" y1="{margin_t + ph}" '
                 f'x2="{margin_l + pw}" y2="{margin_t + ph}" stroke="black"/>')
    parts.append(f'<text x="{margin_l + pw / 2:.1f}" y="{height - 10}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="13">{xlabel}</text>')
    parts.append(f'<text x="18" y="{margin_t + ph / 2:.1f}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 18 {margin_t + ph / 2:.1f})">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def export_trajectory_csv(traj, path):
    """Trajectory export with the `t_s,x_m,y_m,z_m,vx,vy,vz` schema."""
    columns = ("t_s", "x_m", "y_m", "z_m", "vx", "vy", "vz")
    rows = [
        [float(t), float(p[0]), float(p[1]), float(p[2]),
         float(v[0]), float(v[1]), float(v[2])]
        for t, p, v in zip(traj.times, traj.positions, traj.velocities)
    ]
    write_csv(path, columns, rows)
