# Unit tests for geomobility and eventstream
