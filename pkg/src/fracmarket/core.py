"""Domain types for a sell-offer-driven secondary market in fractional shares.

The market trades whole shares of a single asset against cash. Sellers post
priced sell offers into a one-sided book during a pre-trading phase; buyers
then accept offers, fully or partially, over a fixed number of trading
iterations. Buyers cannot post bids, and offers that remain unmatched at the
end of a trading day are deleted, so no order state survives across days.

Cash is kept as an exact rational (`fractions.Fraction`) so that settlement
conserves money exactly: every binary float is a dyadic rational and converts
without loss, which lets conservation checks use equality instead of
tolerances. Offer prices stay ordinary floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from fractions import Fraction

import numpy as np

__all__ = [
    "AgentId",
    "AgentKind",
    "AgentState",
    "ConfigError",
    "ContractViolation",
    "EndowmentError",
    "MarketError",
    "ModelParams",
    "Offer",
    "OfferBook",
    "Rng",
    "make_rng",
]

# Agents are addressed by their dense index into the population list.
AgentId = int

# All randomness flows through numpy Generator objects (PCG64 under
# np.random.default_rng), seeded explicitly by the caller.
Rng = np.random.Generator


def make_rng(seed: int | np.random.SeedSequence) -> Rng:
    """Return the generator used throughout the simulator (PCG64)."""
    return np.random.default_rng(seed)


class MarketError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(MarketError):
    """An operation was called in a state its contract forbids."""


class ConfigError(MarketError):
    """A parameter set or configuration input is invalid."""


class EndowmentError(MarketError):
    """An endowment file or profile could not be used."""


class AgentKind(Enum):
    """Participant role, fixed for the lifetime of an agent.

    Pure sellers hold shares and no cash role; pure buyers hold cash and no
    shares; buyer-sellers may hold both and act on both sides of the market.
    """

    PURE_SELLER = "PS"
    PURE_BUYER = "PB"
    BUYER_SELLER = "BS"

    @property
    def sells(self) -> bool:
        return self is not AgentKind.PURE_BUYER

    @property
    def buys(self) -> bool:
        return self is not AgentKind.PURE_SELLER


@dataclass(slots=True)
class AgentState:
    """Mutable balance sheet of one market participant."""

    id: AgentId
    kind: AgentKind
    shares: int
    cash: Fraction

    def __post_init__(self) -> None:
        # exact type checks; Fraction's metaclass makes isinstance costly
        if type(self.shares) is not int:
            self.shares = int(self.shares)
        if type(self.cash) is not Fraction:
            self.cash = Fraction(self.cash)
        if self.shares < 0:
            raise ContractViolation(f"agent {self.id}: negative shares {self.shares}")
        if self.cash < 0:
            raise ContractViolation(f"agent {self.id}: negative cash {self.cash}")

    def copy(self) -> "AgentState":
        return AgentState(self.id, self.kind, self.shares, self.cash)


@dataclass(slots=True)
class Offer:
    """A live sell offer: `quantity` whole shares at unit price `price`.

    `entry_order` is assigned by the book at insertion and is unique within a
    day; ties between equally priced offers are broken in favour of the
    earlier entry. `price_exact` caches the exact rational value of the float
    price for settlement arithmetic.
    """

    price: float
    quantity: int
    seller: AgentId
    entry_order: int = -1
    price_exact: Fraction = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.price = float(self.price)
        self.quantity = int(self.quantity)
        self.price_exact = Fraction(self.price)

    def copy(self) -> "Offer":
        out = Offer(self.price, self.quantity, self.seller)
        out.entry_order = self.entry_order
        return out


class OfferBook:
    """Insertion-ordered collection of live sell offers.

    The book is rebuilt from scratch every trading day. It enforces at most
    one live offer per seller and hands out monotonically increasing entry
    numbers so that price ties always resolve the same way.
    """

    __slots__ = ("offers", "_live_sellers", "_next_entry")

    def __init__(self) -> None:
        self.offers: list[Offer] = []
        self._live_sellers: set[AgentId] = set()
        self._next_entry = 0

    def __len__(self) -> int:
        return len(self.offers)

    def __iter__(self):
        return iter(self.offers)

    def insert(self, offer: Offer) -> Offer:
        """Add `offer` to the book, assigning its entry number.

        Raises ContractViolation for a non-positive quantity or price, or if
        the seller already has a live offer.
        """
        if offer.quantity < 1:
            raise ContractViolation(
                f"offer from seller {offer.seller} has quantity {offer.quantity}"
            )
        if not (offer.price > 0.0) or not math.isfinite(offer.price):
            raise ContractViolation(
                f"offer from seller {offer.seller} has price {offer.price}"
            )
        if offer.seller in self._live_sellers:
            raise ContractViolation(f"seller {offer.seller} already has a live offer")
        offer.entry_order = self._next_entry
        self._next_entry += 1
        self.offers.append(offer)
        self._live_sellers.add(offer.seller)
        return offer

    def find(self, seller: AgentId) -> Offer | None:
        if seller not in self._live_sellers:
            return None
        for o in self.offers:
            if o.seller == seller:
                return o
        return None

    def apply_fill(self, seller: AgentId, units: int) -> Offer:
        """Consume `units` shares from the live offer of `seller`.

        The offer is removed once its quantity reaches zero. Returns the
        affected offer (post-reduction). Raises ContractViolation if there is
        no live offer from `seller` or `units` is not in [1, quantity].
        """
        offer = self.find(seller)
        if offer is None:
            raise ContractViolation(f"no live offer from seller {seller}")
        if units < 1 or units > offer.quantity:
            raise ContractViolation(
                f"fill of {units} units against offer of {offer.quantity}"
            )
        offer.quantity -= units
        if offer.quantity == 0:
            self.offers.remove(offer)
            self._live_sellers.discard(seller)
        return offer

    def snapshot(self) -> "OfferBook":
        """Deep copy preserving entry numbers, for start-of-day records."""
        out = OfferBook()
        out.offers = [o.copy() for o in self.offers]
        out._live_sellers = set(self._live_sellers)
        out._next_entry = self._next_entry
        return out


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Behavioural parameters of the simulated market.

    Price bounds are multiples of the reference price `p_ref`: a seller
    drawing from (0.75, 1.05) posts between 75% and 105% of `p_ref`. The
    defaults are the calibrated baseline configuration.
    """

    p_ref: float = 50.0  # platform-quoted reference price per share

    # pure sellers: offer with prob ps_offer_prob, list floor(ratio * holding)
    ps_offer_prob: float = 0.114
    ps_offer_ratio: float = 0.603
    ps_price_lo: float = 0.75
    ps_price_hi: float = 1.05

    # pure buyers: shop with prob pb_trade_prob, budget ratio of cash,
    # accept a uniformly drawn offer with logistic probability of slope k_pb
    pb_trade_prob: float = 0.092
    pb_purchase_ratio: float = 0.566
    k_pb: float = 2.0

    # buyer-sellers, offer side
    bs_offer_prob: float = 0.278
    bs_offer_ratio: float = 0.333
    bs_price_lo: float = 0.80
    bs_price_hi: float = 1.10

    # buyer-sellers, buy side: sample up to bs_search_len offers priced
    # below p_ref and take the cheapest
    bs_trade_prob: float = 0.104
    bs_purchase_ratio: float = 0.485
    bs_search_len: int = 5

    # envelope of admissible valuations, used to derive the per-kind bounds
    market_lo: float = 0.75
    market_hi: float = 1.10

    n_trading_iters: int = 12

    # the platform keeps exit_fee_rate of each trade's notional; by default
    # the fee is reported as revenue but not debited from seller proceeds
    exit_fee_rate: float = 0.02
    debit_exit_fee: bool = False

    @classmethod
    def baseline(cls) -> "ModelParams":
        return cls()

    @classmethod
    def with_market_range(cls, lo: float, hi: float, **overrides) -> "ModelParams":
        """Build params from a market valuation range (lo, hi)."""
        return cls(**overrides).with_ranges_from_market(lo, hi)

    def with_ranges_from_market(self, lo: float, hi: float) -> "ModelParams":
        """Copy with the valuation envelope moved to (lo, hi).

        Per-kind bounds are re-derived by shrinking the envelope by 0.05 on
        one side each: pure sellers use (lo, hi - 0.05), buyer-sellers
        (lo + 0.05, hi), so buyer-sellers skew 0.05 higher. The new envelope
        must be at least 0.10 wide for both to stay ordered.
        """
        return self.replace(
            market_lo=lo,
            market_hi=hi,
            ps_price_lo=lo,
            ps_price_hi=hi - 0.05,
            bs_price_lo=lo + 0.05,
            bs_price_hi=hi,
        )

    def validate(self) -> None:
        """Raise ConfigError listing every invalid field."""
        problems: list[str] = []
        for name in (
            "ps_offer_prob",
            "pb_trade_prob",
            "bs_offer_prob",
            "bs_trade_prob",
            "ps_offer_ratio",
            "pb_purchase_ratio",
            "bs_offer_ratio",
            "bs_purchase_ratio",
            "exit_fee_rate",
        ):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not 0.0 <= v <= 1.0:
                problems.append(f"{name}={v!r} not in [0, 1]")
        if not (isinstance(self.p_ref, (int, float)) and self.p_ref > 0):
            problems.append(f"p_ref={self.p_ref!r} not positive")
        if not (isinstance(self.k_pb, (int, float)) and math.isfinite(self.k_pb)):
            problems.append(f"k_pb={self.k_pb!r} not finite")
        # zero-width bounds (lo == hi) are legal so degenerate price draws
        # can be scripted in tests
        for lo_name, hi_name in (
            ("ps_price_lo", "ps_price_hi"),
            ("bs_price_lo", "bs_price_hi"),
            ("market_lo", "market_hi"),
        ):
            lo, hi = getattr(self, lo_name), getattr(self, hi_name)
            if not (isinstance(lo, (int, float)) and isinstance(hi, (int, float))):
                problems.append(f"{lo_name}/{hi_name} not numeric")
            elif not (0.0 < lo <= hi):
                problems.append(f"({lo_name}, {hi_name})=({lo}, {hi}) must satisfy 0 < lo <= hi")
        if not (isinstance(self.bs_search_len, int) and self.bs_search_len >= 1):
            problems.append(f"bs_search_len={self.bs_search_len!r} not a positive int")
        if not (isinstance(self.n_trading_iters, int) and self.n_trading_iters >= 1):
            problems.append(f"n_trading_iters={self.n_trading_iters!r} not a positive int")
        if problems:
            raise ConfigError("invalid parameters: " + "; ".join(problems))

    def replace(self, **changes) -> "ModelParams":
        """Copy with fields changed; validates the result."""
        p = replace(self, **changes)
        p.validate()
        return p

    @staticmethod
    def field_names() -> tuple[str, ...]:
        return tuple(f.name for f in fields(ModelParams))
