#!/usr/bin/env python

# owcpresets.py

# Experiment presets: the standard sweeps of the evaluation.

import argparse
import sys

"""
After you import this module with "import owcpresets" use
``owcpresets.preset["throughput-vs-activation"]`` to get the
configuration text of a particular preset,
or iterate over ``owcpresets.preset`` for them all.
:func:`lookup` also accepts the numbered names in ``owcpresets.alias``.

Each preset is an INI text in the format :mod:`owcrun` reads;
anything it does not set comes from the defaults
(:data:`owcrun.DEFAULTS`).
``[preset] assumed`` lists the settings the sweep takes from the defaults.

Also a command line tool: ``python -m owcpresets --list``.
"""


preset = {
    'sinr-cdf': """
[preset]
name = sinr-cdf
description = CDF of the reference user's SINR given U_a = 2, 4, 8,
    analytic against Monte Carlo
assumed = Phi_half_deg = 60, D_m = 4, L_m = 3

[run]
task = sinr_cdf
u_a = 2 4 8
mode = both
seed = 20230101
n_slots = 1000000
""",
    'throughput-vs-semiangle': """
[preset]
name = throughput-vs-semiangle
description = throughput against the LED semi-angle, p_a = 0.05
assumed = U = 50, D_m = 4, L_m = 3, n = 64, R = 1/2;
    one curve of the family, rerun with other p_a values

[protocol]
p_a = 0.05

[sweep]
param = Phi_half_deg
min = 30
max = 80
step = 5
""",
    'error-vs-height': """
[preset]
name = error-vs-height
description = error probability against AP height, D = 2 m
assumed = U = 50, p_a = 0.05, n = 64, Phi_half_deg = 60;
    one curve of the family, rerun with other R and D_m values

[geometry]
D_m = 2

[sweep]
param = L_m
min = 1
max = 8
step = 0.5
""",
    'error-vs-height-narrow': """
[preset]
name = error-vs-height-narrow
description = error probability against AP height, semi-angle 30 degrees
assumed = U = 50, p_a = 0.05, n = 64, D_m = 4;
    heights below 2.5 m need a finer inversion grid at this semi-angle

[optics]
Phi_half_deg = 30

[sweep]
param = L_m
min = 2.5
max = 8
step = 0.5
""",
    'throughput-vs-activation': """
[preset]
name = throughput-vs-activation
description = throughput against activation probability, U = 50
assumed = D_m = 4, L_m = 3, n = 64, R = 1/2, Phi_half_deg = 60

[protocol]
U = 50

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'throughput-low-rate': """
[preset]
name = throughput-low-rate
description = throughput against activation probability, R = 1/3
assumed = U = 50, D_m = 4, L_m = 3, n = 64, Phi_half_deg = 60

[fbl]
R = 1/3

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'outage-vs-activation': """
[preset]
name = outage-vs-activation
description = outage probability against activation probability,
    eps_th = 1e-3, R = 1/2, n = 64, D = 2 m
assumed = U = 50, L_m = 3, Phi_half_deg = 60

[geometry]
D_m = 2

[fbl]
n = 64
R = 1/2
eps_th = 1e-3
allow_short_blocklength = yes

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'capture-narrow': """
[preset]
name = capture-narrow
description = throughput against activation probability with capture,
    semi-angle 30 degrees
assumed = U = 50, D_m = 4, L_m = 3, n = 64, R = 1/2

[optics]
Phi_half_deg = 30

[protocol]
capture = yes

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'nocapture-narrow': """
[preset]
name = nocapture-narrow
description = throughput against activation probability without capture,
    semi-angle 30 degrees
assumed = U = 50, D_m = 4, L_m = 3, n = 64, R = 1/2

[optics]
Phi_half_deg = 30

[protocol]
capture = no

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'capture-high-rate': """
[preset]
name = capture-high-rate
description = throughput against activation probability with capture,
    R = 2/3
assumed = U = 50, D_m = 4, L_m = 3, n = 64, Phi_half_deg = 60;
    one curve of the family, rerun with other R values

[fbl]
R = 2/3

[protocol]
capture = yes

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
    'nocapture-high-rate': """
[preset]
name = nocapture-high-rate
description = throughput against activation probability without capture,
    R = 2/3
assumed = U = 50, D_m = 4, L_m = 3, n = 64, Phi_half_deg = 60;
    one curve of the family, rerun with other R values

[fbl]
R = 2/3

[protocol]
capture = no

[sweep]
param = p_a
min = 0.01
max = 0.5
step = 0.01
""",
}

# Numbered names of the standard sweeps, in evaluation order.
alias = {
    'fig2': 'sinr-cdf',
    'fig3': 'throughput-vs-semiangle',
    'fig4': 'error-vs-height',
    'fig5': 'error-vs-height-narrow',
    'fig6': 'throughput-vs-activation',
    'fig7': 'throughput-low-rate',
    'fig8': 'outage-vs-activation',
    'fig8-outage': 'outage-vs-activation',
    'fig9': 'capture-high-rate',
    'fig9-capture-rate': 'capture-high-rate',
    'fig9-nocapture-rate': 'nocapture-high-rate',
    'fig9-capture': 'capture-narrow',
    'fig9-nocapture': 'nocapture-narrow',
}


def names():
    """Every name :func:`lookup` accepts, sorted."""
    return sorted(set(preset) | set(alias))


def lookup(name):
    """
    The configuration text of preset `name` (a preset or an alias).
    Raises :exc:`KeyError` for an unknown name.
    """

    return preset[alias.get(name, name)]


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Print an experiment preset")
    either = parser.add_mutually_exclusive_group(required=True)
    either.add_argument('--list', action='store_true')
    either.add_argument('name', nargs='?')

    args = parser.parse_args(argv)

    if args.list:
        for name in names():
            print(name)
        return 0

    try:
        text = lookup(args.name)
    except KeyError:
        print("cannot find preset " + args.name, file=sys.stderr)
        return 1

    sys.stdout.write(text.lstrip())
    return 0


if __name__ == '__main__':
    sys.exit(main())
