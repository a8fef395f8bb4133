# End-to-end pipeline tests on generated worlds
