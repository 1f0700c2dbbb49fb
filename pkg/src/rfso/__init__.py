"""Symbol error analysis for dual-hop RF/FSO amplify-and-forward relaying.

The RF hop is Rayleigh faded and the FSO hop follows the Malaga (M)
turbulence law. Modules:

``numerics``     special functions, quadrature and Meijer's G-function
``channel``      fading laws, densities and samplers
``relay``        relay gain strategies and end-to-end SNR
``analytics``    closed-form CDF, MGF and ASER with quadrature twins
``asymptotics``  high-SNR ASER, diversity order and SNR gaps
``simulate``     seeded Monte Carlo with confidence intervals
``cli``          the ``rfso`` command
"""

__version__ = "0.1.0"
