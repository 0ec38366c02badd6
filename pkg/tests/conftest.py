import json
from pathlib import Path

import pytest

from lucas_uzawa import InitialEndowment, ModelParams, assemble_solution

ROOT = Path(__file__).resolve().parents[1]
CONFIG_DIR = ROOT / "configs"

P1 = ModelParams(beta=0.5, sigma=2.0, rho=0.04, delta=0.05, gamma=0.1, pi=0.0, theta=0.0)
P2 = P1.replace(theta=0.1)
# h0 that puts P2 on its balanced growth path: h0**1.2 * u_star = z_star
P2_BGP_H0 = (1.44 / (0.05 / 0.06)) ** (1 / 1.2)
P1_BGP = InitialEndowment(1.0, 10 / 9)
P2_BGP = InitialEndowment(1.0, P2_BGP_H0)
OFF_BGP = [InitialEndowment(1.0, 1.0), InitialEndowment(1.0, 0.5), InitialEndowment(2.0, 1.0),
           InitialEndowment(1.0, 1.4)]


def shipped_configs():
    return sorted(CONFIG_DIR.glob("*.json"))


def load_doc(path):
    return json.loads(Path(path).read_text())


@pytest.fixture(scope="session")
def p1_bgp():
    return assemble_solution(P1, P1_BGP)


@pytest.fixture(scope="session")
def p2_bgp():
    return assemble_solution(P2, P2_BGP)


@pytest.fixture(scope="session")
def p1_off():
    return assemble_solution(P1, InitialEndowment(1.0, 1.0))


@pytest.fixture(scope="session")
def p2_off():
    return assemble_solution(P2, InitialEndowment(1.0, 1.0))


def random_feasible(rng, max_tries=1000):
    """Draw structural parameters until the derived rates are feasible."""
    from lucas_uzawa.params import validate

    for _ in range(max_tries):
        beta = rng.uniform(0.2, 0.8)
        sigma = rng.uniform(0.5, 4.0)
        if abs(sigma - 1) < 0.05 or abs(sigma - beta) < 0.05:
            continue
        p = ModelParams(beta=beta, sigma=sigma, rho=rng.uniform(0.01, 0.08),
                        delta=rng.uniform(0.02, 0.15), gamma=rng.uniform(0.05, 1.5),
                        pi=rng.uniform(0.0, 0.04), theta=rng.uniform(0.0, 0.3))
        report = validate(p)
        if report.ok and not report.warnings:
            return p
    raise RuntimeError("no feasible draw")


def bgp_endowment(params, k0=1.0):
    from lucas_uzawa.params import derive_constants

    dc = derive_constants(params)
    return InitialEndowment(k0, (dc.z_star * k0 / dc.u_star) ** (1 / dc.eta))
