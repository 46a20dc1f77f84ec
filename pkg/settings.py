"""
Константы предметной области, общие для всех модулей.
"""

DB_NAME = "registry.db"

# Размерность i-vector / ae-vector / эмбеддинга
SPEAKER_VECTOR_DIM = 400

# Мел-спектрограммы: 80 полос, окно обучения N = 350 кадров
N_MELS = 80
CROP_FRAMES = 350
SAMPLE_RATE = 16000

# Три пулинга 2x2 подряд: минимальная длина входа энкодера
MIN_ENCODER_FRAMES = 8
