from .engine import evaluate_point
from .rqc import RqcConfig, Scenario, StageId, bob_state, build_rqc, oracle_state, predicted_irreality
from .tomography import ReadoutNoiseModel, reconstruct
from .verify import run_verification
