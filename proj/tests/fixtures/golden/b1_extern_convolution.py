import torch
import torch.nn as nn
import triton
import triton.language as tl

from torch._inductor.select_algorithm import extern_kernels
from torch._inductor.runtime.triton_heuristics import grid
from torch._C import _cuda_getCurrentRawStream as get_raw_stream
from torch._C._dynamo.guards import assert_size_stride


@triton.jit
def triton_poi_fused_convolution_0(in_out_ptr0, in_ptr0, xnumel, XBLOCK: tl.constexpr):
    xoffset = tl.program_id(0) * XBLOCK
    xindex = xoffset + tl.arange(0, XBLOCK)[:]
    
    tl.full([XBLOCK], True, tl.int1)

    x3 = xindex
    x1 = xindex // 4096 

    tmp0 = tl.load(in_out_ptr0 + x3, None)
    tmp1 = tl.load(in_ptr0 + x1, None, eviction_policy='evict_last')

    tmp2 = tmp0 + tmp1

    tl.store(in_out_ptr0 + x3, tmp2, None)


def call(args):
    primals_1, primals_2, primals_3 = args
    args.clear()

    assert_size_stride(primals_1, (2, 3, 1, 1), (3, 1, 1, 1))
    assert_size_stride(primals_2, (2,), (1,))
    assert_size_stride(primals_3, (4, 3, 64, 64), (12288, 4096, 64, 1))

    with torch.cuda._DeviceGuard(0):
        torch.cuda.set_device(0)

        buf0 = extern_kernels.convolution(
            primals_3,
            primals_1,
            stride=(1, 1),
            padding=(0, 0),
            dilation=(1, 1),
            transposed=False,
            output_padding=(0, 0),
            groups=1,
            bias=None
        )

        assert_size_stride(buf0, (4, 2, 64, 64), (8192, 4096, 64, 1))

        buf1 = buf0
        del buf0

        get_raw_stream(0)

        triton_poi_fused_convolution_0[grid(32768)](
            buf1, primals_2, 32768,
            XBLOCK=128,
            num_warps=4,
            num_stages=1
        )

        del primals_2

    return buf1, primals_1, primals_3


class ModelNew(nn.Module):
    def __init__(self, num_classes=2, in_channels=3, is_deconv=False, is_batchnorm=False, *args, **kwargs):
        super(ModelNew, self).__init__()
        self.is_deconv = is_deconv
        self.in_channels = in_channels
        self.is_batchnorm = is_batchnorm

        self.final = nn.Conv2d(self.in_channels, num_classes, kernel_size=1)

    def forward(self, input_0):
        primals_1 = self.final.weight
        primals_2 = self.final.bias
        primals_3 = input_0

        output = call([primals_1, primals_2, primals_3])
        return output[0]
