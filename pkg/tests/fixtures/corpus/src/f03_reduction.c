#include <stddef.h>

double total(const double *mat, size_t size)
{
    double sum = 0.0;
    #pragma acc enter data copyin(mat[0:size*size])
    sum = 0.0;
    #pragma acc parallel loop present(mat[0: size*size]) reduction(+:sum)
    for(size_t i=0; i<size; ++i){
        for(size_t j=0; j<size; ++j){
            sum += mat[i*size+j];
        }
    }
    {
        #pragma acc exit data delete(mat)
    }
    return sum;
}
