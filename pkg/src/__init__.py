# CamFit package
