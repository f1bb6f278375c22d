"""Single import surface over core/ and services/ for routes, the worker and the CLIs."""
from core.errors import (CapacityError, DegenerateMixerError, DimensionError, FitError, InstanceFormatError,
                         InvalidMatchingError, RoutingError, ToolkitError, TraceParseError, UndefinedRatioError)
from core.hubo import (BinaryPolynomial, HuboInstance, approximation_ratio, bitstring, brute_force_ground_state,
                       energies, energy, evaluate, flip_delta, instance_digest, instance_from_dict, instance_to_dict,
                       is_comparable, load_instance, local_field, random_instance, save_instance, spins_from_bitstring,
                       spins_to_bits, to_binary, to_spin)
from core.sampler import CoefficientSampler, make_rng, sampler_from_config, spawn_streams, truncated_pareto_cdf
from core.topology import (CouplingMap, LayoutPlan, ParallelSets, check_routable, generate_layout, graph_coloring,
                           heavy_hex, heavy_hex_patch, heron_r2, instantiate, is_routable, layout_for_instance,
                           layout_from_dict, layout_to_dict, load_layout, save_layout, swap_register, term_counts)
from schemas.annealing import SaConfig
from schemas.bench import GeneratorConfig, SuiteConfig
from schemas.bfdcqo import BfDcqoConfig
from services.annealing import (Calibration, SaResult, anneal, calibrate_sweep_time, cpu_time_model, descend,
                                fit_sweep_time, geometric_schedule, run_chains)
from services.bench import (enhancement_factor, generate_instance, hardness_screen, hardness_sweep,
                            load_suite_config, run_suite, tt_r)
from services.bfdcqo import (BfDcqoResult, cvar_reduce, effective_angle_scan, post_process, run_bfdcqo,
                             runtime_model, update_bias)
from services.mip_bridge import (IncumbentTrace, MipModel, check_feasible, complete_assignment, export_lp,
                                 export_warm_start, ingest_trace, linearize, model_stats, objective_value,
                                 parse_trace, read_trace, resample_trace, warm_start_from_sa)
from services.statevector import (CdProgram, MixerField, ShotSet, build_cd_program, dump_program, load_program,
                                  prep_angles, prepare_state, sample_shots, simulate)
