"""Accumulative hash-time-locked payments along relay paths."""

from .engine import PayeeEngine, PayerEngine
from .htlc import LockReceipt, PathSpec, ack_receipt, build_outgoing_lock, receipt_valid, verify_incoming_lock
from .ideal import PAYEE_BEHAVIORS, PAYER_BEHAVIORS, ExchangeTrace, ideal_exchange
from .timelocks import Timelocks, payment_schedule, timelocks_multi, timelocks_single

__all__ = [
    "ExchangeTrace",
    "LockReceipt",
    "PAYEE_BEHAVIORS",
    "PAYER_BEHAVIORS",
    "PathSpec",
    "PayeeEngine",
    "PayerEngine",
    "Timelocks",
    "ack_receipt",
    "build_outgoing_lock",
    "ideal_exchange",
    "payment_schedule",
    "receipt_valid",
    "timelocks_multi",
    "timelocks_single",
    "verify_incoming_lock",
]
