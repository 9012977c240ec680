from .service import create_app
from .session import (
    BusyFlying,
    Gesture,
    InvalidGesture,
    NotAirborne,
    Phase,
    Session,
    SessionClosed,
    SessionManager,
    gesture_from_pitch,
)

__all__ = [
    "create_app", "BusyFlying", "Gesture", "InvalidGesture", "NotAirborne",
    "Phase", "Session", "SessionClosed", "SessionManager", "gesture_from_pitch",
]
