"""Fixed-policy path validation via an absorbing Markov chain.

A planned path, executed under a retry-until-success-or-failure policy,
induces a chain with one transient state per path position plus two
absorbing states (done / dead).  The probability of reaching done is both
computed in closed form and re-derived from the linear absorption system;
the two must agree to near machine precision on every call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import effective_success
from .planner import (max_success_path, path_from_nodes,
                      shortest_distance_path)

AGREEMENT_TOL = 1e-12


@dataclass(frozen=True)
class FixedPolicyChain:
    """Absorbing chain of a path under the fixed retry policy.

    probs holds one OutcomeProbs per traversed edge; transient state i
    attempts edge i, state len(probs) is done, state len(probs)+1 is dead.
    """

    path: tuple
    probs: tuple

    @property
    def done_index(self):
        return len(self.probs)

    @property
    def dead_index(self):
        return len(self.probs) + 1


def build_chain(g, nodes):
    """Chain for an explicit node sequence; every hop must be an edge of g."""
    path = path_from_nodes(g, nodes)  # validates hops
    probs = tuple(g.probs(g.edge(a, b))
                  for a, b in zip(path.nodes, path.nodes[1:]))
    return FixedPolicyChain(path.nodes, probs)


def evaluate_chain(chain):
    r"""Probability that the chain is absorbed in done.

    Closed form: the retry self-loop at state i resolves geometrically, so

        P(done) = prod_i  p_success_i / (p_success_i + p_fail_i)

    The same value is recomputed by solving the absorption system
    (I - Q) b = r, where Q is the transient-to-transient block and r the
    one-step absorption column into done.  A disagreement beyond 1e-12
    means the chain is corrupt, and raises ArithmeticError.
    """
    closed = 1.0
    for p in chain.probs:
        closed = closed * effective_success(p)

    k = len(chain.probs)
    if k == 0:
        linear = 1.0
    else:
        a = np.eye(k)
        r = np.zeros(k)
        for i, p in enumerate(chain.probs):
            a[i, i] -= p.p_retry
            if i + 1 < k:
                a[i, i + 1] -= p.p_success
            else:
                r[i] = p.p_success
        linear = float(np.linalg.solve(a, r)[0])

    if abs(closed - linear) > AGREEMENT_TOL:
        raise ArithmeticError(
            f"closed form {closed!r} and linear solve {linear!r} disagree "
            f"for path {chain.path}")
    return closed


def export_prism(chain, path_label):
    """Render the chain as a PRISM mdp model plus a companion property.

    Output is byte-stable for identical chains: probabilities are written
    with shortest round-trip repr and states are numbered along the path.
    Returns (model_text, props_text).
    """
    k = len(chain.probs)
    done, dead = k, k + 1
    lines = [
        f"// {path_label}",
        "// fixed-policy traversal of path " +
        " -> ".join(str(n) for n in chain.path),
        "",
        "mdp",
        "",
        f"const int final = {done};",
        "",
        "module path_traversal",
        "",
        f"    state : [0..{dead}] init 0;",
        "",
    ]
    for i, p in enumerate(chain.probs):
        lines.append(
            f"    [] state={i} -> {p.p_success!r}:(state'={i + 1})"
            f" + {p.p_retry!r}:(state'={i})"
            f" + {p.p_fail!r}:(state'={dead});")
    lines += [
        f"    [] state={done} -> 1:(state'={done});",
        f"    [] state={dead} -> 1:(state'={dead});",
        "",
        "endmodule",
        "",
        "label \"end\" = state=final;",
        "",
    ]
    model = "\n".join(lines)
    props = (f"// {path_label}\n"
             "Pmax=? [ F (\"end\" & state=final) ]\n")
    return model, props


def select_path(dist_path, prob_path, r_dist, r_prob):
    """Pick between the two planned paths by validated probability.

    The distance path wins only when strictly more reliable; ties keep the
    probability path.
    """
    return dist_path if r_dist > r_prob else prob_path


def plan_validated_path(g, start, final, heated=None):
    """Plan both objectives, validate each chain, return the selection.

    Planning and validation run on the heat overlay when one is given,
    otherwise on g.  Returns (path, validated_probability), or (None, None)
    when final is unreachable.  Identical candidate paths are evaluated
    once.
    """
    query = heated if heated is not None else g
    dist_path = shortest_distance_path(query, start, final)
    if dist_path is None:
        return None, None
    prob_path = max_success_path(query, start, final)
    r_dist = evaluate_chain(build_chain(query, dist_path.nodes))
    if prob_path.nodes == dist_path.nodes:
        r_prob = r_dist
    else:
        r_prob = evaluate_chain(build_chain(query, prob_path.nodes))
    picked = select_path(dist_path, prob_path, r_dist, r_prob)
    return picked, (r_dist if picked is dist_path else r_prob)
