"""Central parameter defaults and numerical tolerances."""
from dataclasses import dataclass, asdict, fields

FEAS_TOL = 1e-6
RC_TOL = 1e-6
INT_TOL = 1e-6


@dataclass(frozen=True)
class Params:
    """Operational parameters shared by pool, network and master construction.

    Attributes:
        speed_kmh: Constant train speed.
        dwell_min: Stopping time per stop, minutes.
        transfer_min: Duration of a board arc (station node -> travel node).
        unit_cost_per_hour: Line operating cost per frequency and hour.
        passenger_factor: Passenger duration threshold as a multiple of the
            minimal travel time.
        freight_factor: Same for freight.
        throughput_per_hour: Maximal trains per hour on a track.
        joint_directions: Count both directions of a track against one
            throughput budget.
        interperiod_at_transfers_only: Only create freight interperiod arcs at
            stations served by at least two routes.
        count_initial_access: Include arcs before the first travel node in
            path durations.
        carriage_units: Passengers or freight units per carriage.
    """
    speed_kmh: float = 300.0
    dwell_min: int = 6
    transfer_min: int = 30
    unit_cost_per_hour: float = 30_000.0
    passenger_factor: float = 1.5
    freight_factor: float = 3.0
    throughput_per_hour: float = 6.0
    joint_directions: bool = True
    interperiod_at_transfers_only: bool = False
    count_initial_access: bool = False
    carriage_units: int = 100

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**data)
