"""Command line front end.

Exit codes: 0 the property holds, 1 it fails (the output carries a witness
that ``verify-witness`` re-checks), 2 usage or validation error, 3 resource cap.
All output is JSON with rationals as "p/q" strings; ``--format table`` prints a
plain summary instead.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .covers import cover_quotient_pipeline, is_U_semi_expansive, load_cover, pullback_cover
from .envelope import DEFAULT_ELEMENT_CAP, build_shadowing_envelope
from .errors import BadParameters, BadThresholds, ExpShadowError, ParseError, TooLarge
from .expansivity import (expansiveness_gap, expansiveness_region, expansivity_constant,
                          is_eps_alpha_expansive, is_semi_expansive)
from .fixtures import generate_fixture
from .graphs import load_restriction
from .quotients import (build_quotient, class_diameters, expansivity_cover, lewowicz_metric,
                        lewowicz_relation, load_partition)
from .shadowing import (DEFAULT_SUBSET_CAP, INF, anosov_quotient_pipeline, anosov_reverse,
                        certify_semi_anosov, decide_shadowing, periodic_shadowing_oracle,
                        shadowing_modulus)
from .stability import (DEFAULT_ENUMERATION_CAP, permutations_within, sample_permutations_within,
                        stability_sweep)
from .systems import (FiniteMetricSystem, c0_distance, dump_system, fmt_rational, load_system,
                      parse_rational)
from .witnesses import verify_witness

COMMANDS = ("certify", "region", "quotient", "covers", "shadowing", "semi-anosov",
            "anosov-quotient", "stability", "envelope", "openness", "generate", "verify-witness")

ENUMERATION_CAP = int(os.environ.get("EXPSHADOW_ENUMERATION_CAP", str(DEFAULT_ENUMERATION_CAP)))


@dataclass
class RunConfig:
    command: str
    system: Optional[str] = None
    epsilon: Optional[Fraction] = None
    alpha: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    radius: Optional[Fraction] = None
    period: Optional[int] = None
    eps_grid: Optional[list] = None
    partition: Optional[str] = None
    cover: Optional[str] = None
    restriction: Optional[str] = None
    witness: Optional[str] = None
    oracle_period: Optional[int] = None
    k: int = 4
    element_cap: int = DEFAULT_ELEMENT_CAP
    subset_cap: int = DEFAULT_SUBSET_CAP
    enumeration_cap: int = ENUMERATION_CAP
    sample: Optional[int] = None
    seed: int = 0
    jobs: int = 1
    out: Optional[str] = None
    export: Optional[str] = None
    fmt: str = "json"
    fixture: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("epsilon", "alpha", "delta", "radius"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise BadThresholds(f"--{name} must be positive, got {fmt_rational(v)}")
        for name in ("element_cap", "subset_cap", "enumeration_cap", "jobs", "k"):
            if getattr(self, name) < 1:
                raise BadParameters(f"--{name.replace('_', '-')} must be positive")
        if self.eps_grid is not None and any(e <= 0 for e in self.eps_grid):
            raise BadParameters("--eps-grid entries must be positive")


def _rational_arg(text: str) -> Fraction:
    # thresholds go through the same parser as file contents; validation happens in RunConfig
    try:
        return parse_rational(text)
    except ExpShadowError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _grid_arg(text: str) -> list:
    return [_rational_arg(t) for t in text.split(",") if t.strip()]


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None


def _load(cfg: RunConfig) -> FiniteMetricSystem:
    if cfg.system is None:
        raise BadParameters("--system is required")
    return load_system(_read_json(cfg.system), name=Path(cfg.system).stem)


def _need(cfg: RunConfig, *names):
    for name in names:
        if getattr(cfg, name) is None:
            raise BadParameters(f"--{name.replace('_', '-')} is required for {cfg.command}")


# -- commands ------------------------------------------------------------------

def cmd_certify(cfg: RunConfig):
    _need(cfg, "epsilon", "alpha")
    sys = _load(cfg)
    cert = is_eps_alpha_expansive(sys, cfg.epsilon, cfg.alpha)
    out = cert.to_json()
    if cert.holds:
        sup, attained = expansiveness_gap(sys, cfg.epsilon, cfg.alpha)
        out["gap"] = {"sup_delta": fmt_rational(sup), "attained": attained}
    out["semi_expansive_at_alpha"] = is_semi_expansive(sys, cfg.alpha).holds
    return out, 0 if cert.holds else 1


def cmd_region(cfg: RunConfig):
    sys = _load(cfg)
    return {"bands": [b.to_json() for b in expansiveness_region(sys)],
            "expansivity_constant_sup": fmt_rational(expansivity_constant(sys))}, 0


def cmd_quotient(cfg: RunConfig):
    _need(cfg, "alpha")
    sys = _load(cfg)
    if cfg.partition:
        part = load_partition(_read_json(cfg.partition), sys)
    else:
        part = lewowicz_relation(sys, cfg.alpha)
    q = build_quotient(sys, part)
    semi = is_semi_expansive(sys, cfg.alpha)
    out = {"alpha": fmt_rational(cfg.alpha), "semi_expansive": semi.holds,
           "class_diameters": [fmt_rational(v) for v in class_diameters(part, sys)],
           **q.to_json(),
           "quotient_expansivity_constant_sup": fmt_rational(expansivity_constant(q.quotient))}
    out["lewowicz_metric"] = lewowicz_metric(q, cfg.alpha).to_json()
    if semi.holds and part == lewowicz_relation(sys, cfg.alpha):
        ec = expansivity_cover(sys, cfg.alpha, part)
        out["expansivity_cover"] = {**ec.cover.to_json(q.quotient.points), "valid": ec.valid}
    return out, 0


def cmd_covers(cfg: RunConfig):
    sys = _load(cfg)
    out = {}
    code = 0
    if cfg.cover:
        cover = load_cover(_read_json(cfg.cover), sys)
        semi = is_U_semi_expansive(sys, cover, cfg.k)
        out["k"] = cfg.k
        out["u_semi_expansive"] = semi.holds
        out["relation_transitive"] = semi.relation.transitive
        if not semi.holds:
            x, y = semi.witness
            out["witness"] = {"kind": "cover_pair", "k": cfg.k, "x": sys.points[x],
                              "y": sys.points[y], "cover": cover.to_json(sys.points)["sets"]}
            code = 1
        elif cfg.k == 4:
            res = cover_quotient_pipeline(sys, cover)
            out["pipeline"] = {**res.quotient.to_json(),
                               "quotient_cover": res.quotient_cover.to_json(res.quotient.quotient.points),
                               "generator": res.generator}
            code = 0 if res.generator else 1
    if cfg.alpha is not None:
        q = build_quotient(sys, lewowicz_relation(sys, cfg.alpha))
        alpha_R = cfg.radius if cfg.radius is not None else _half_constant(q.quotient)
        pb = pullback_cover(q, alpha_R)
        out["pullback"] = {"alpha_R": fmt_rational(alpha_R), "ball_radius": fmt_rational(pb.radius),
                           "cover": pb.cover.to_json(sys.points)["sets"],
                           "u_semi_expansive": pb.semi.holds,
                           "relation_matches": pb.relation_matches}
        if not pb.holds:
            code = 1
    if not out:
        raise BadParameters("covers needs --cover and/or --alpha")
    return out, code


def _half_constant(sys: FiniteMetricSystem) -> Fraction:
    c = expansivity_constant(sys)
    return Fraction(1) if c == INF else c / 2


def cmd_shadowing(cfg: RunConfig):
    _need(cfg, "epsilon")
    sys = _load(cfg)
    if cfg.delta is None:
        sup, attained = shadowing_modulus(sys, cfg.epsilon, cfg.subset_cap)
        return {"epsilon": fmt_rational(cfg.epsilon), "sup_delta": fmt_rational(sup),
                "attained": attained}, 0
    restriction = load_restriction(_read_json(cfg.restriction), sys) if cfg.restriction else None
    cert = decide_shadowing(sys, cfg.epsilon, cfg.delta, restriction, cfg.subset_cap)
    out = cert.to_json()
    if cfg.oracle_period:
        orc = periodic_shadowing_oracle(sys, cfg.epsilon, cfg.delta, cfg.oracle_period)
        out["oracle"] = {"max_period": cfg.oracle_period, "holds": orc.holds,
                         "cycle": None if orc.cycle is None else [sys.points[x] for x in orc.cycle]}
    return out, 0 if cert.holds else 1


def cmd_semi_anosov(cfg: RunConfig):
    _need(cfg, "alpha")
    sys = _load(cfg)
    cert = certify_semi_anosov(sys, cfg.alpha, cfg.subset_cap)
    return cert.to_json(), 0 if cert.holds else 1


def cmd_anosov_quotient(cfg: RunConfig):
    _need(cfg, "alpha")
    sys = _load(cfg)
    res = anosov_quotient_pipeline(sys, cfg.alpha, cfg.eps_grid, cfg.subset_cap)
    out = res.to_json()
    Q = res.quotient.quotient
    alpha_rev = cfg.alpha if expansivity_constant(Q) > cfg.alpha else _half_constant(Q)
    rev = anosov_reverse(res.quotient, alpha_rev, subset_cap=cfg.subset_cap)
    out["reverse"] = rev.to_json()
    return out, 0 if res.all_moduli_positive and rev.holds else 1


def cmd_stability(cfg: RunConfig):
    _need(cfg, "alpha")
    sys = _load(cfg)
    part = lewowicz_relation(sys, cfg.alpha)
    radius = cfg.radius
    if radius is None:
        cert = certify_semi_anosov(sys, cfg.alpha, cfg.subset_cap)
        if not cert.holds:
            return cert.to_json(), 1
        radius = cert.delta
    rep = stability_sweep(sys, part, cfg.alpha, radius, cfg.enumeration_cap, cfg.sample,
                          cfg.seed, cfg.jobs)
    out = rep.to_json()
    failed = [e for e in rep.entries if not e.success]
    if failed and failed[0].witness is not None:
        out["witness"] = failed[0].witness
    return out, 0 if not failed else 1


def cmd_envelope(cfg: RunConfig):
    sys = _load(cfg)
    res = build_shadowing_envelope(sys, cfg.period, cfg.alpha, cfg.eps_grid, cfg.element_cap,
                                   cfg.subset_cap)
    if cfg.export:
        Path(cfg.export).write_text(json.dumps(dump_system(res.space.system), indent=2) + "\n",
                                    encoding="utf-8")
    return res.to_json(), 0 if res.holds else 1


def _openness_one(args):
    sys, g, epsilon, alpha = args
    cert = is_eps_alpha_expansive(sys.with_map(g), epsilon, alpha)
    return g, cert


def cmd_openness(cfg: RunConfig):
    _need(cfg, "epsilon", "alpha", "radius")
    sys = _load(cfg)
    base = is_eps_alpha_expansive(sys, cfg.epsilon, cfg.alpha)
    if cfg.sample is not None:
        perms = sample_permutations_within(sys, cfg.radius, cfg.sample, cfg.seed)
    elif sys.n > cfg.enumeration_cap:
        raise TooLarge(f"{sys.n} points exceed the enumeration cap {cfg.enumeration_cap}; "
                       f"pass --sample")
    else:
        perms = permutations_within(sys, cfg.radius)
    work = [(sys, g, cfg.epsilon, cfg.alpha) for g in perms]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_openness_one, work))
    else:
        results = [_openness_one(w) for w in work]
    rows = [{"g": list(g), "c0_to_f": fmt_rational(c0_distance(sys, g)), "holds": c.holds}
            for g, c in results]
    holding = sum(r["holds"] for r in rows)
    out = {"epsilon": fmt_rational(cfg.epsilon), "alpha": fmt_rational(cfg.alpha),
           "radius": fmt_rational(cfg.radius), "base_holds": base.holds,
           "perturbations": len(rows), "holding": holding, "sampled": cfg.sample is not None,
           "entries": rows}
    if base.holds:
        sup, _ = expansiveness_gap(sys, cfg.epsilon, cfg.alpha)
        out["gap_sup_delta"] = fmt_rational(sup)
    bad = next(((g, c) for g, c in results if not c.holds), None)
    if bad is not None:
        g, c = bad
        out["witness"] = dict(c.to_json()["witness"], map=list(g))
        return out, 1
    return out, 0


def cmd_generate(cfg: RunConfig):
    params = dict(cfg.fixture)
    kind = params.pop("kind")
    for side in ("left", "right", "base"):
        if params.get(side):
            params[side] = load_system(_read_json(params[side]))
        else:
            params.pop(side, None)
    params = {k: v for k, v in params.items() if v is not None}
    sys = generate_fixture(kind, **params)
    return dump_system(sys), 0


def cmd_verify_witness(cfg: RunConfig):
    _need(cfg, "witness")
    sys = _load(cfg)
    ok, detail = verify_witness(sys, _read_json(cfg.witness))
    return {"confirmed": ok, "detail": detail}, 0 if ok else 1


HANDLERS = {
    "certify": cmd_certify, "region": cmd_region, "quotient": cmd_quotient,
    "covers": cmd_covers, "shadowing": cmd_shadowing, "semi-anosov": cmd_semi_anosov,
    "anosov-quotient": cmd_anosov_quotient, "stability": cmd_stability,
    "envelope": cmd_envelope, "openness": cmd_openness, "generate": cmd_generate,
    "verify-witness": cmd_verify_witness,
}


def run(cfg: RunConfig) -> tuple[dict, int]:
    try:
        return HANDLERS[cfg.command](cfg)
    except ExpShadowError as exc:
        return exc.to_json(), exc.exit_code


# -- argument parsing ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="expshadow", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, system=True):
        if system:
            p.add_argument("--system", help="system JSON file")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", dest="fmt", choices=("json", "table"), default="json")
        return p

    def thresholds(p, *names):
        for name in names:
            p.add_argument(f"--{name}", type=_rational_arg)

    caps = argparse.ArgumentParser(add_help=False)
    caps.add_argument("--subset-cap", type=int, default=DEFAULT_SUBSET_CAP)
    caps.add_argument("--element-cap", type=int, default=DEFAULT_ELEMENT_CAP)
    caps.add_argument("--enumeration-cap", type=int, default=ENUMERATION_CAP)
    caps.add_argument("--jobs", type=int, default=1)

    p = common(sub.add_parser("certify", parents=[caps], help="[eps,alpha]-expansiveness"))
    thresholds(p, "epsilon", "alpha")
    common(sub.add_parser("region", parents=[caps], help="admissible (eps, alpha) region"))
    p = common(sub.add_parser("quotient", parents=[caps], help="R(d,alpha) quotient"))
    thresholds(p, "alpha")
    p.add_argument("--partition", help="partition JSON instead of R(d,alpha)")
    p = common(sub.add_parser("covers", parents=[caps], help="cover relations and pull-backs"))
    thresholds(p, "alpha", "radius")
    p.add_argument("--cover", help="cover JSON")
    p.add_argument("--k", type=int, default=4, help="chain power (4 is certified)")
    p = common(sub.add_parser("shadowing", parents=[caps], help="exact shadowing decision"))
    thresholds(p, "epsilon", "delta")
    p.add_argument("--restriction", help="restriction graph JSON")
    p.add_argument("--oracle-period", type=int)
    p = common(sub.add_parser("semi-anosov", parents=[caps], help="semi-Anosov certificate"))
    thresholds(p, "alpha")
    p = common(sub.add_parser("anosov-quotient", parents=[caps], help="Anosov quotient pipeline"))
    thresholds(p, "alpha")
    p.add_argument("--eps-grid", type=_grid_arg)
    p = common(sub.add_parser("stability", parents=[caps], help="perturbation sweep"))
    thresholds(p, "alpha", "radius")
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int, default=0)
    p = common(sub.add_parser("envelope", parents=[caps], help="shadowing envelope"))
    thresholds(p, "alpha")
    p.add_argument("--period", type=int)
    p.add_argument("--eps-grid", type=_grid_arg)
    p.add_argument("--export", help="write the periodic sequence space as a system file")
    p = common(sub.add_parser("openness", parents=[caps], help="re-certify nearby maps"))
    thresholds(p, "epsilon", "alpha", "radius")
    p.add_argument("--sample", type=int)
    p.add_argument("--seed", type=int, default=0)
    p = common(sub.add_parser("generate", help="write a fixture system"), system=False)
    p.add_argument("kind", choices=("cycle", "line", "product", "interval", "random"))
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-weight", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=_rational_arg)
    p.add_argument("--w1", type=_rational_arg)
    p.add_argument("--w2", type=_rational_arg)
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--base")
    p = common(sub.add_parser("verify-witness", help="re-check an exit-1 witness"))
    p.add_argument("--witness", help="witness JSON (or a whole exit-1 output)")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.command == "generate":
        fixture = {"kind": ns.kind, "n": ns.n, "seed": ns.seed, "max_weight": ns.max_weight,
                   "k": ns.k, "alpha": ns.alpha, "w1": ns.w1, "w2": ns.w2,
                   "left": ns.left, "right": ns.right, "base": ns.base}
        return RunConfig("generate", out=ns.out, fmt=ns.fmt, fixture=fixture)
    keys = {"system", "epsilon", "alpha", "delta", "radius", "period", "eps_grid", "partition",
            "cover", "restriction", "witness", "oracle_period", "k", "element_cap", "subset_cap",
            "enumeration_cap", "sample", "seed", "jobs", "out", "export", "fmt"}
    return RunConfig(ns.command, **{k: v for k, v in vars(ns).items() if k in keys})


def render_table(payload: dict) -> str:
    lines = []
    for key, value in payload.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            cols = list(value[0])
            lines.append(f"{key}:")
            lines.append("  " + "  ".join(cols))
            for row in value:
                lines.append("  " + "  ".join(json.dumps(row.get(c)) for c in cols))
        else:
            lines.append(f"{key}: {json.dumps(value)}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
    except ExpShadowError as exc:
        payload, code = exc.to_json(), exc.exit_code
        fmt, out = getattr(ns, "fmt", "json"), getattr(ns, "out", None)
    else:
        payload, code = run(cfg)
        fmt, out = cfg.fmt, cfg.out
    if not (ns.command == "generate" and code == 0):
        # generated systems stay in the plain system format
        payload = {"command": ns.command, "exit_code": code, **payload}
    text = render_table(payload) if fmt == "table" else json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return code


if __name__ == "__main__":
    _sys.exit(main())
