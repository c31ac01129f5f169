from .shapes import Disk, HarmonicBackground, SmoothBoundary
from .body import Body, BoundaryChart, lens_corners
from .gap import GapInfo, body_gap, gap
from .config import (Configuration, build_case_a, build_case_b, build_case_c,
                     build_case_d, build_two_disks)
from .serialize import (ConfigParseError, RunInput, emit_configuration,
                        parse_configuration, parse_run)
