"""Two-microphone area-based sound source separation with steerable ROI.

A mask-based separator keeps sound arriving from an angular region of
interest and suppresses everything else. The region is rotated at
inference time by a per-frequency phase shift on the second channel, so
one estimator serves every steering angle. The package bundles the DSP
core, the steering geometry, a seedable acoustic scene simulator, an
evaluation harness (PR heatmaps, steering sweeps, SI-SDR, RTF), a CLI,
and a WebSocket control service for live steering.
"""

from .dsp import (MultichannelAudio, Spectrogram, StftConfig, bin_frequencies,
                  bin_frequency, istft, stft)
from .errors import (PipelineError, SceneError, SteerbeamError, SteeringError,
                     WavFormatError)
from .geometry import (ArrayGeometry, Roi, SteeredBoundaries, SteeringState,
                       apply_steering, ipd_of_angle, linear_boundaries, measured_ipd,
                       steered_boundaries, steering_phase, steering_vector,
                       sweep_membership_oracle)
from .heatmap import HeatmapGrid, delta_pr, pr_heatmap, sweep_delta_pr
from .metrics import (MetricsReport, RtfResult, measure_rtf, power_reduction,
                      separation_report, si_sdr)
from .scene import (ArrayPose, RoomSpec, Scene, SignalSpec, SourceSpec, load_scene,
                    mix_scene, plane_wave, render_scene, sample_training_scene,
                    simulate_far_field, simulate_shoebox)
from .separation import (ComplexMask, MaskEstimator, PhaseDifferenceMask,
                         PhaseMaskConfig, StreamingPipeline, UnitMask,
                         estimate_phase_mask, separate, separate_audio)
from .wavio import read_wav, write_wav

__version__ = "0.1.0"
