"""Netlist camouflaging via multi-period (wave) paths.

Submodules
----------
netlist    gate-level sequential netlist model and bench I/O
delaylib   pin delay tables with slew/load interpolation
timing     static timing, path records, wave window predicates
falsepath  sensitization CNF and true/false path checks
retiming   register move legality and application
milp       dense-simplex branch and bound solver
simulate   event-driven inertial simulation and equivalence
"""

from .netlist import (Netlist, Gate, FlipFlop, NetlistError, parse_bench,
                      write_bench, normalize_ff_branches, eval_gate)
from .delaylib import DelayLibrary, default_library
from .timing import (TimingConfig, Path, propagate_arrivals, path_delay,
                     classify_gray, check_wp_window, sample_paths,
                     downstream_delay, setup_slack)
from .falsepath import (SensitizationCondition, build_condition,
                        is_true_path, check_wp_false_paths,
                        check_wp_true_paths, solve_cnf)
from .retiming import (RetimingAssignment, is_legal, apply_retiming,
                       ff_count_delta, retimed_weight)
from .milp import MilpModel, MilpSolution, solve
from .simulate import (simulate, sync_outputs, equivalence_check,
                       SimTrace, EquivalenceReport, CompiledNetlist)

__version__ = "0.1.0"
