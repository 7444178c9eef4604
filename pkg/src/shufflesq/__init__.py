"""Shuffle squares: exact recognition, greedy and boosted buffer threads,
k-ary counting, and seeded experiments."""
from .boosted import (BitStream, BoostedRun, CycleResult, Failure, PhaseState, boosted_cycle,
                      chain_statistics, constructive_partition, cycle_statistics, final_buffer_length,
                      run_boosted, verify_quasibuffer)
from .buffers import (BufferSet, buffer_step, delta_exact, detect_A, detect_E, evolve,
                      extract_partition, lt, min_sigma2, recognize, two_sided_partition,
                      verify_decomposition)
from .errors import *  # noqa: F401,F403
from .experiments import (ExperimentConfig, StatReport, chernoff_check, density_experiment,
                          lt_experiment, cesaro_Y_experiment, sample_geom, sample_nb,
                          validate_claims)
from .greedy import (QTable, check_monotonicity, estimate_c, greedy_step, greedy_trace,
                     qtable_evolve, qtable_iter)
from .kary import (KaryState, alpha_bound, count_shuffle_squares, kary_boosted_run,
                   kary_boosted_step, kary_recognize)
from .words import (APPEND, EMPTY, MATCH, Indicator, Partition, QuasiBuffer, Rng, Sigma2Buffer,
                    Word, as_word, parse_quasi, parse_word, random_word, render)

__version__ = "0.1.0"
