import torch

# single-threaded torch: deterministic and, on this workload's small
# tensors, faster than the thread pool
torch.set_num_threads(1)
