"""snowsim: signal-level SNOW LPWAN simulator.

D-OFDM PHY (encode/decode, PAPR), channel impairments, preamble-based CSI and
two-stage CFO estimation with Doppler handling, adaptive transmission power
control, a CSMA/CA MAC with ACK bit-vectors, and a discrete-event engine
exposing the deployment-scale experiments through the `snowsim` CLI.
"""

from .signals import BasebandSignal
from .spectrum import SpectrumPlan, default_plan, ofdm_grid_plan
from .packets import SnowPacket, crc16_ccitt, preamble_bits
from .modem import ModulationScheme, modulate, demodulate, detect_preamble
from .dofdm import dofdm_encode, dofdm_decode, extract_band, extract_subcarrier
from .papr import PaprReport, compute_papr, papr_ccdf, hpa_efficiency, dofdm_frame_paprs
from .channel import (LinkModel, OscillatorModel, MobilityState, PathLossModel,
                      path_loss_db, apply_link, apply_cfo, doppler_shift_hz,
                      mix_concurrent, rssi_dbm)
from .estimation import (PreambleSplit, CfoEstimate, CsiEstimate, split_preamble,
                         estimate_cfo_coarse, estimate_cfo_fine, estimate_cfo,
                         ppm_and_subcarrier_cfo, proactive_correction,
                         snr_loss_factor, estimate_csi)
from .atpc import (PowerVector, PdrSamples, AtpcModel, fit_initial, select_power,
                   update_intercept, predict_pdr)
from .mac import (NodeMacState, MacEvent, MacParams, AckBitVector, BsState,
                  node_step, bs_ack_epoch, downlink_failover, ProtocolError)
from .simconfig import (SimConfig, NodeSpec, CompensationFlags, EnergyProfile,
                        InterfererSpec, default_config, cluster_nodes)
from .metrics import Metrics, NodeMetrics
from .engine import Engine, run
