"""Smoke test for the ineqprep_py extension module.

Build and install first:
    cd crates/python && maturin develop --release
"""
import math

import ineqprep_py as ip


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol


def main():
    state, report = ip.prepare_inverse([3, 5], m=4)
    norm = math.sqrt(52)
    assert close(report.post_selected_amplitudes[0], 6 / norm)
    assert close(report.post_selected_amplitudes[1], 4 / norm)
    assert report.multiplication_count == 2
    assert close(state.norm(), 1.0)
    assert close(sum(state.marginal("I")), 1.0)

    _, block = ip.prepare_inverse([3, 5], m=4, backend="block")
    assert report.agrees_with(block, 1e-10)

    _, div = ip.prepare_division([8, 12], [3, 5], m=5)
    assert len(div) == 2

    _, uni = ip.prepare_uniform(3)
    assert close(uni.success_probability_raw, 0.25, 1e-12)
    assert close(uni.success_probability_final, 1.0)

    _, gen = ip.prepare_general([3, 0], m=4)
    assert close(gen.post_selected_amplitudes[0], 8 / math.sqrt(320))
    assert ip.counting_oracle_general(3, m=4) == 8

    assert ip.counting_oracle_inverse(3, 1, 4) == 6
    assert ip.optimal_rounds(0.25) == 1
    assert ip.cost_inequality_method()["multiplications"] == 2
    assert ip.cost_newton_raphson(2.0**-16)["multiplications"] == 16
    p, bound = ip.uniform_theta_perturbation(5, 0.05)
    assert p >= bound

    try:
        ip.prepare_inverse([3, 0], m=4)
    except ValueError:
        pass
    else:
        raise AssertionError("zero entry accepted")

    print("smoke test passed:", report, sorted(report.as_dict()))


if __name__ == "__main__":
    main()
