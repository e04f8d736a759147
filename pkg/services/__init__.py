# Services package for the medium, kinematics, scattering, quantum and sweep stages
