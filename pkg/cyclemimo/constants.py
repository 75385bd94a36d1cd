CYCLEMIMO_ENV_PREFIX = "CYCLEMIMO"

# System setup
DEFAULT_TX_ANTENNAS = 64
DEFAULT_RX_ANTENNAS = 8
DEFAULT_STREAMS = 8
DEFAULT_BLOCK_LENGTH = 320  # K = P + D symbols per coherence block
DEFAULT_PILOTS = 64
DEFAULT_PAYLOAD = 256
MIN_PILOTS = 4  # 3:1 train/validation split needs at least one validation pair
BITS_PER_QPSK_SYMBOL = 2
QPSK_SYMBOL_ENERGY = 1.0

# Channel
DEFAULT_DOPPLER_HZ = 926.0
DEFAULT_SYMBOL_RATE_HZ = 1.0e6
DEFAULT_OSCILLATORS = 16
JAKES_T0_WINDOW_CYCLES = 1.0e4  # t0 drawn over this many Doppler periods
JAKES_T0_WINDOW_STATIC_S = 1.0  # window used when the Doppler shift is zero
DEFAULT_RICIAN_FACTOR_DB = 10.0

# Power amplifier
DEFAULT_PA_COEFFICIENTS = (1.0, -1.5, -0.3)

# Networks
DEFAULT_GENERATOR_HIDDEN = (256, 512)
DEFAULT_DISCRIMINATOR_HIDDEN = (512, 256)
DEFAULT_LEAKY_SLOPE = 0.2
DEFAULT_DROPOUT_RATE = 0.1

# Training
DEFAULT_LEARNING_RATE = 0.0002
DEFAULT_BETA1 = 0.5
DEFAULT_BETA2 = 0.99
DEFAULT_ADAM_EPSILON = 1e-8
DEFAULT_L2_COEFF = 1e-4
DEFAULT_BATCH_SIZE = 128
DEFAULT_LABEL_INVERT_PROB = 0.05
DEFAULT_PATIENCE = 100
DEFAULT_EPOCH_CAP = 5000
DEFAULT_PILOT_AUGMENT_FACTOR = 10
DEFAULT_PAYLOAD_AUGMENT_FACTOR = 5
DEFAULT_AUGMENT_NOISE_STD = 0.05
DEFAULT_LOSS_WEIGHT = 1.0
VALIDATION_SHARE = 4  # one in four pilot pairs is held out

# Sweep
DEFAULT_EBN0_DB = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
DEFAULT_BLOCKS_PER_POINT = 100
DEFAULT_SEED = 2024
DEFAULT_OUTPUT_PATH = "results.csv"

# CSV
CSV_FLOAT_FORMAT = "{:.10g}"
