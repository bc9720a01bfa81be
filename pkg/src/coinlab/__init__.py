"""coinlab: an executable laboratory for betting on a favorably biased coin.

Layers, innermost first:

* ``engine`` — pure integer-cents game state machine (flips, bets, payout);
* ``strategies`` — betting policies producing the next wager from a state view;
* ``analytics`` — closed-form results and exact distributions (no sampling);
* ``montecarlo`` — seeded, reproducible simulation batches;
* ``behavior`` — metrics over recorded play (bet sizing, tails-chasing,
  loss-doubling);
* ``service`` — FastAPI HTTP facade with event-sourced persistence;
* ``cli`` — ``coinlab`` command-line entry points.
"""

from .analytics import (
    ExactDistribution,
    GameParams,
    OptimalPolicy,
    TableRow,
    all_in_ruin,
    certainty_equivalent,
    exact_capped_distribution,
    fixed_fraction_grid_value,
    headline_table,
    log_growth,
    median_wealth,
    optimal_cap_policy,
    per_flip_edge,
    return_risk_ratio,
    uncapped_ev,
)
from .behavior import (
    BetFractionStats,
    CohortStats,
    SessionLedger,
    TailsStats,
    bet_fraction_stats,
    cohort_report,
    is_martingale_like,
    martingale_score,
    tails_stats,
)
from .engine import (
    BetIntent,
    CapDisclosure,
    FlipRecord,
    GameConfig,
    GameState,
    Side,
    Status,
    apply_flip,
    derive_path_stream,
    derive_session_stream,
    new_session,
    payout,
    place_bet,
    replay,
    validate_bet,
)
from .montecarlo import (
    BatchSpec,
    OracleComparison,
    SummaryStats,
    compare_to_oracle,
    run_batch,
)
from .strategies import (
    StateView,
    StrategySpec,
    glide_fraction,
    kelly_fraction,
    next_bet,
    parse_strategy,
    view_of,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # engine
    "Side",
    "Status",
    "CapDisclosure",
    "GameConfig",
    "GameState",
    "BetIntent",
    "FlipRecord",
    "new_session",
    "validate_bet",
    "apply_flip",
    "place_bet",
    "payout",
    "replay",
    "derive_path_stream",
    "derive_session_stream",
    # strategies
    "StateView",
    "StrategySpec",
    "view_of",
    "kelly_fraction",
    "glide_fraction",
    "next_bet",
    "parse_strategy",
    # analytics
    "GameParams",
    "ExactDistribution",
    "exact_capped_distribution",
    "OptimalPolicy",
    "optimal_cap_policy",
    "fixed_fraction_grid_value",
    "TableRow",
    "headline_table",
    "per_flip_edge",
    "uncapped_ev",
    "log_growth",
    "certainty_equivalent",
    "median_wealth",
    "return_risk_ratio",
    "all_in_ruin",
    # montecarlo
    "BatchSpec",
    "SummaryStats",
    "OracleComparison",
    "run_batch",
    "compare_to_oracle",
    # behavior
    "SessionLedger",
    "BetFractionStats",
    "TailsStats",
    "CohortStats",
    "bet_fraction_stats",
    "tails_stats",
    "martingale_score",
    "is_martingale_like",
    "cohort_report",
]
